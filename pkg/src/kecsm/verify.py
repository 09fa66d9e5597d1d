"""Certification and ground truth: connectivity checks, exact tiny-instance
optimum, tail-bound and approximation-factor formulas, Bernoulli-sum statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CutSpec, MetricInstance, MultiEdgeSet, global_min_cut


@dataclass(frozen=True)
class ConnectivityCertificate:
    """Minimum cut value of a multiset together with a witnessing side."""

    min_cut_value: int
    witness: CutSpec
    passes: bool


def verify_k_connectivity(m: MultiEdgeSet, n: int, k: int) -> ConnectivityCertificate:
    """Certify that every cut of the multiset carries at least k edges.

    Runs a deterministic global min cut with multiplicities as weights.  A
    multiset that misses some vertex fails with value 0.
    """
    weights = {e: float(mult) for e, mult in m.multiplicity.items()}
    value, witness = global_min_cut(weights, n)
    int_value = int(round(value))
    return ConnectivityCertificate(
        min_cut_value=int_value,
        witness=witness,
        passes=int_value >= k,
    )


class TooLargeError(ValueError):
    """Exact search requested beyond its tractable size."""


def brute_force_opt(inst: MetricInstance, cap: int | None = None) -> tuple[float, MultiEdgeSet]:
    """Exact minimum-cost k-edge-connected multi-subgraph by branch and bound.

    Searches multiplicity vectors edge by edge, pruning on cost against the
    incumbent and on unreachable vertex degrees.  Multiplicity per edge is
    capped at k: lowering any multiplicity above k keeps every cut at k or
    more, so some optimum respects the cap (unit-tested against a 2k-cap
    search).  Limited to n <= 5, k <= 6.
    """
    if inst.n > 5 or inst.k > 6:
        raise TooLargeError(f"exact search limited to n <= 5 and k <= 6, got n={inst.n}, k={inst.k}")
    k = inst.k
    cap = k if cap is None else cap
    edges = inst.edges()
    m = len(edges)
    costs = np.array([inst.edge_cost(e) for e in edges])

    # incumbent: ceil(k/2) copies of a doubled spanning tree is always feasible
    start = _doubled_tree_start(inst)
    best_cost = start.total_cost(inst.cost)
    best_vec = [start.multiplicity.get(e, 0) for e in edges]

    incident = [[j for j, e in enumerate(edges) if v in e] for v in range(inst.n)]
    remaining_deg_cap = [np.zeros(m + 1) for _ in range(inst.n)]
    for v in range(inst.n):
        for j in range(m - 1, -1, -1):
            remaining_deg_cap[v][j] = remaining_deg_cap[v][j + 1] + (cap if v in edges[j] else 0)

    vec = [0] * m

    def search(j: int, cost_so_far: float, degrees: list[int]):
        nonlocal best_cost, best_vec
        if cost_so_far >= best_cost - 1e-12:
            return
        if j == m:
            mult = MultiEdgeSet({e: vec[i] for i, e in enumerate(edges) if vec[i]})
            value, _ = global_min_cut({e: float(mu) for e, mu in mult.multiplicity.items()}, inst.n)
            if value >= k - 1e-9 and cost_so_far < best_cost - 1e-12:
                best_cost = cost_so_far
                best_vec = list(vec)
            return
        for v in range(inst.n):
            if degrees[v] + remaining_deg_cap[v][j] < k:
                return
        u, w = edges[j]
        for mult in range(cap + 1):
            vec[j] = mult
            degrees[u] += mult
            degrees[w] += mult
            search(j + 1, cost_so_far + mult * costs[j], degrees)
            degrees[u] -= mult
            degrees[w] -= mult
        vec[j] = 0

    search(0, 0.0, [0] * inst.n)
    solution = MultiEdgeSet({e: best_vec[i] for i, e in enumerate(edges) if best_vec[i]})
    return float(best_cost), solution


def _doubled_tree_start(inst: MetricInstance) -> MultiEdgeSet:
    """Feasible warm start: ceil(k/2) copies of a doubled greedy spanning tree."""
    order = sorted(inst.edges(), key=lambda e: (inst.edge_cost(e), e))
    parent = list(range(inst.n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    copies = 2 * math.ceil(inst.k / 2)
    mult = {}
    for e in order:
        ra, rb = find(e[0]), find(e[1])
        if ra != rb:
            parent[ra] = rb
            mult[e] = copies
    return MultiEdgeSet(mult)


def chernoff_tail(q_prime: float, epsilon: float) -> float:
    """Lower-tail bound exp(-epsilon^2 * q' / 2) for Bernoulli-sum variables.

    epsilon = 1 is accepted: the bound extends there by continuity (the event
    becomes "below zero").
    """
    if q_prime <= 0:
        raise ValueError(f"q_prime must be positive, got {q_prime}")
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    return math.exp(-epsilon * epsilon * q_prime / 2.0)


@dataclass(frozen=True)
class ApproxFactor:
    """Guarantee at connectivity k: headline closed form and the sharper expression."""

    k: int
    alpha: float
    headline: float
    precise: float


def approx_factor(k: int) -> ApproxFactor:
    """Expected approximation factor: 1 + sqrt(8 ln k / k), and the sharper
    1 + alpha/sqrt(k/2) + exp(-alpha^2/2) at alpha = sqrt(ln(k/2))."""
    if k < 2:
        raise ValueError("k must be at least 2")
    headline = 1.0 + math.sqrt(8.0 * math.log(k) / k)
    alpha = math.sqrt(max(math.log(k / 2.0), 0.0))
    precise = 1.0 + alpha / math.sqrt(k / 2.0) + math.exp(-alpha * alpha / 2.0)
    return ApproxFactor(k=k, alpha=alpha, headline=headline, precise=precise)


@dataclass(frozen=True)
class BernoulliSumStats:
    """Sample mean/variance of integer counts; Bernoulli sums have variance <= mean.

    ``slack_stderr`` is the standard error of (variance - mean), the quantity
    the dispersion tests band with 3 sigma.
    """

    mean: float
    variance: float
    count: int
    slack_stderr: float

    @property
    def variance_minus_mean(self) -> float:
        return self.variance - self.mean


def bs_stats(samples) -> BernoulliSumStats:
    """Summary statistics used by the variance-vs-mean dispersion checks."""
    x = np.asarray(list(samples), dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    d = (x - mean) ** 2 - x
    stderr = float(d.std(ddof=1) / math.sqrt(x.size))
    return BernoulliSumStats(mean=mean, variance=var, count=int(x.size), slack_stderr=stderr)
