import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kecsm.core import (
    CutSpec,
    MetricInstance,
    MultiEdgeSet,
    NotConnectedError,
    cut_size,
    global_min_cut,
    make_edge,
    metric_closure,
    validate_metric,
)

from oracles import exhaustive_min_cut

INF = float("inf")


class TestValidateMetric:
    def test_equilateral_triangle_is_clean(self, triangle_unit):
        assert validate_metric(triangle_unit) == []

    def test_single_triangle_violation(self):
        inst = MetricInstance(n=3, cost=[[0, 1, 5], [1, 0, 1], [5, 1, 0]], k=2)
        violations = validate_metric(inst)
        assert len(violations) == 1
        v = violations[0]
        assert v.kind == "triangle"
        assert v.vertices == (0, 1, 2)
        assert v.amount == pytest.approx(3.0)

    def test_two_vertices_have_no_triples(self):
        inst = MetricInstance(n=2, cost=[[0, 7], [7, 0]], k=2)
        assert validate_metric(inst) == []

    def test_asymmetry_and_diagonal_reported(self):
        inst = MetricInstance(n=2, cost=[[0.5, 1], [2, 0]], k=2)
        kinds = {v.kind for v in validate_metric(inst)}
        assert "symmetry" in kinds
        assert "diagonal" in kinds

    def test_negative_cost_reported(self):
        inst = MetricInstance(n=2, cost=[[0, -1], [-1, 0]], k=2)
        assert any(v.kind == "negative" for v in validate_metric(inst))


class TestMetricClosure:
    def test_path_shortcut(self):
        raw = [[0, 1, INF], [1, 0, 1], [INF, 1, 0]]
        inst = metric_closure(3, raw, k=2)
        assert inst.cost[0, 2] == pytest.approx(2.0)
        assert validate_metric(inst) == []

    def test_idempotent_on_metrics(self, triangle_unit):
        closed = metric_closure(3, triangle_unit.cost, k=2)
        assert np.allclose(closed.cost, triangle_unit.cost)

    def test_four_cycle_chords_close_to_two(self):
        # hand Floyd-Warshall: chords (0,2) and (1,3) go around two unit edges
        raw = np.full((4, 4), INF)
        np.fill_diagonal(raw, 0.0)
        for u, v in [(0, 1), (1, 2), (2, 3), (0, 3)]:
            raw[u, v] = raw[v, u] = 1.0
        inst = metric_closure(4, raw, k=2)
        assert inst.cost[0, 2] == pytest.approx(2.0)
        assert inst.cost[1, 3] == pytest.approx(2.0)
        assert validate_metric(inst) == []

    def test_disconnected_raises(self):
        raw = [[0, INF], [INF, 0]]
        with pytest.raises(NotConnectedError, match="not connected"):
            metric_closure(2, raw, k=2)

    def test_negative_raw_rejected(self):
        with pytest.raises(ValueError):
            metric_closure(2, [[0, -3], [-3, 0]], k=2)

    @given(seed=st.integers(0, 10_000), n=st.integers(3, 7))
    @settings(max_examples=40, deadline=None)
    def test_closure_always_metric(self, seed, n):
        rng = np.random.default_rng(seed)
        raw = rng.random((n, n)) * 10
        raw = (raw + raw.T) / 2
        np.fill_diagonal(raw, 0.0)
        inst = metric_closure(n, raw, k=2)
        assert validate_metric(inst) == []
        assert np.all(inst.cost <= raw + 1e-12)


class TestCutSize:
    def test_triangle_singleton(self):
        m = MultiEdgeSet({(0, 1): 1, (0, 2): 1, (1, 2): 1})
        assert cut_size(m, CutSpec(side=frozenset({0}), n=3)) == 2

    def test_empty_multiset(self):
        assert cut_size(MultiEdgeSet(), CutSpec(side=frozenset({0}), n=3)) == 0

    def test_multiplicities_add(self):
        m = MultiEdgeSet({(0, 1): 2, (0, 2): 2, (1, 2): 1})
        assert cut_size(m, CutSpec(side=frozenset({0}), n=3)) == 4

    @given(st.integers(0, 500))
    @settings(max_examples=30, deadline=None)
    def test_union_additivity(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
        a = MultiEdgeSet({e: int(rng.integers(0, 4)) for e in edges})
        b = MultiEdgeSet({e: int(rng.integers(0, 4)) for e in edges})
        side = frozenset({0} | {v for v in range(1, n) if rng.random() < 0.5})
        if len(side) == n:
            side = frozenset({0})
        s = CutSpec(side=side, n=n)
        assert cut_size(a.union(b), s) == cut_size(a, s) + cut_size(b, s)
        assert a.union(b).size() == a.size() + b.size()


class TestMultiEdgeSet:
    def test_canonicalizes_and_drops_zeros(self):
        m = MultiEdgeSet({(2, 1): 3, (0, 1): 0})
        assert m.multiplicity == {(1, 2): 3}

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            MultiEdgeSet({(0, 1): -1})

    def test_from_pairs_counts(self):
        m = MultiEdgeSet.from_pairs([(0, 1), (1, 0), (1, 2)])
        assert m.multiplicity == {(0, 1): 2, (1, 2): 1}

    def test_total_cost(self, triangle_unit):
        m = MultiEdgeSet({(0, 1): 2, (1, 2): 1})
        assert m.total_cost(triangle_unit.cost) == pytest.approx(3.0)


class TestEdgesAndCuts:
    def test_make_edge_orders(self):
        assert make_edge(3, 1) == (1, 3)

    def test_make_edge_rejects_loop(self):
        with pytest.raises(ValueError):
            make_edge(2, 2)

    def test_cutspec_rejects_improper(self):
        with pytest.raises(ValueError):
            CutSpec(side=frozenset(), n=3)
        with pytest.raises(ValueError):
            CutSpec(side=frozenset({0, 1, 2}), n=3)


class TestGlobalMinCut:
    def test_triangle(self):
        value, side = global_min_cut({(0, 1): 1, (0, 2): 1, (1, 2): 1}, 3)
        assert value == pytest.approx(2.0)

    def test_two_vertices(self):
        value, side = global_min_cut({(0, 1): 7.0}, 2)
        assert value == pytest.approx(7.0)
        assert side.side == frozenset({0})

    def test_k4_equals_exhaustive(self):
        weights = {(u, v): 1.0 for u in range(4) for v in range(u + 1, 4)}
        value, _ = global_min_cut(weights, 4)
        assert value == pytest.approx(exhaustive_min_cut(weights, 4))
        assert value == pytest.approx(3.0)

    def test_disconnected_returns_zero(self):
        value, side = global_min_cut({(0, 1): 2.0, (2, 3): 5.0}, 4)
        assert value == pytest.approx(0.0)
        cut_weight = sum(
            w for (u, v), w in {(0, 1): 2.0, (2, 3): 5.0}.items()
            if (u in side.side) != (v in side.side)
        )
        assert cut_weight == pytest.approx(0.0)

    def test_witness_matches_value(self):
        rng = np.random.default_rng(7)
        weights = {(u, v): float(rng.integers(0, 5)) for u in range(6) for v in range(u + 1, 6)}
        value, side = global_min_cut(weights, 6)
        cut_weight = sum(w for (u, v), w in weights.items() if (u in side.side) != (v in side.side))
        assert cut_weight == pytest.approx(value)

    @given(seed=st.integers(0, 10_000), n=st.integers(2, 10))
    @settings(max_examples=60, deadline=None)
    def test_matches_exhaustive_enumeration(self, seed, n):
        rng = np.random.default_rng(seed)
        weights = {}
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < 0.7:
                    weights[(u, v)] = float(rng.random() * 3)
        value, side = global_min_cut(weights, n)
        assert value == pytest.approx(exhaustive_min_cut(weights, n), abs=1e-9)
        cut_weight = sum(w for (u, v), w in weights.items() if (u in side.side) != (v in side.side))
        assert cut_weight == pytest.approx(value, abs=1e-9)
