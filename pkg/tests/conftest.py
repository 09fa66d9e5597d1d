"""Shared fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from kecsm.core import MetricInstance


@pytest.fixture
def triangle_unit():
    return MetricInstance(n=3, cost=[[0, 1, 1], [1, 0, 1], [1, 1, 0]], k=2)


@pytest.fixture
def k4_unit():
    cost = np.ones((4, 4)) - np.eye(4)
    return MetricInstance(n=4, cost=cost, k=2)
