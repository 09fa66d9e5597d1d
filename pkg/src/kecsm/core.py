"""Graph, metric, cut, and edge-multiset primitives shared by all solver stages."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Absolute tolerance for all floating-point comparisons at this layer.
# Desk-scale costs stay below ~1e4, so 1e-9 is far under any real difference.
TOL = 1e-9

Edge = tuple[int, int]


class NotConnectedError(ValueError):
    """Raised when an operation needs a connected graph and the input is not."""


def make_edge(u: int, v: int) -> Edge:
    """Canonical undirected edge key with endpoints ordered u < v."""
    if u == v:
        raise ValueError(f"self-loop ({u},{v}) is not a valid edge")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class MetricInstance:
    """Complete graph on vertices 0..n-1 with symmetric costs and connectivity target k.

    The cost matrix is copied and frozen at construction.  Structural shape is
    enforced here; metric axioms are checked by :func:`validate_metric` so that
    malformed inputs can be reported rather than rejected blindly.
    """

    n: int
    cost: np.ndarray
    k: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 vertices, got n={self.n}")
        if self.k < 2:
            raise ValueError(f"connectivity target must be >= 2, got k={self.k}")
        cost = np.array(self.cost, dtype=float, copy=True)
        if cost.shape != (self.n, self.n):
            raise ValueError(f"cost matrix must be {self.n}x{self.n}, got {cost.shape}")
        cost.flags.writeable = False
        object.__setattr__(self, "cost", cost)

    def edges(self) -> list[Edge]:
        """All edges of the complete graph in lexicographic order."""
        return [(u, v) for u in range(self.n) for v in range(u + 1, self.n)]

    def edge_cost(self, e: Edge) -> float:
        return float(self.cost[e[0], e[1]])


@dataclass(frozen=True)
class MetricViolation:
    """One failed metric axiom: kind is 'symmetry', 'diagonal', 'negative' or 'triangle'."""

    kind: str
    vertices: tuple[int, ...]
    amount: float

    def __str__(self):
        return f"{self.kind} violation at {self.vertices} (excess {self.amount:.3g})"


def validate_metric(inst: MetricInstance, tol: float = TOL) -> list[MetricViolation]:
    """Check symmetry, zero diagonal, nonnegativity, and the triangle inequality.

    Returns an empty list iff the instance is a metric within ``tol``.  A
    triangle entry (x, y, z) means cost(x,z) > cost(x,y) + cost(y,z); each
    unordered endpoint pair with a given midpoint is reported once.
    """
    c = inst.cost
    n = inst.n
    out: list[MetricViolation] = []
    for u in range(n):
        if abs(c[u, u]) > tol:
            out.append(MetricViolation("diagonal", (u,), abs(float(c[u, u]))))
        for v in range(u + 1, n):
            if abs(c[u, v] - c[v, u]) > tol:
                out.append(MetricViolation("symmetry", (u, v), abs(float(c[u, v] - c[v, u]))))
            if c[u, v] < -tol or c[v, u] < -tol:
                out.append(MetricViolation("negative", (u, v), -float(min(c[u, v], c[v, u]))))
    for x in range(n):
        for z in range(x + 1, n):
            for y in range(n):
                if y == x or y == z:
                    continue
                excess = c[x, z] - (c[x, y] + c[y, z])
                if excess > tol:
                    out.append(MetricViolation("triangle", (x, y, z), float(excess)))
    return out


def metric_closure(n: int, raw_cost: np.ndarray, k: int) -> MetricInstance:
    """All-pairs shortest-path closure of a symmetric nonnegative cost matrix.

    ``raw_cost`` may contain ``inf`` for absent edges.  The result is a valid
    metric with closure(u,v) <= raw_cost(u,v); a pair left at infinity raises
    :class:`NotConnectedError`.
    """
    d = np.array(raw_cost, dtype=float, copy=True)
    if d.shape != (n, n):
        raise ValueError(f"raw cost matrix must be {n}x{n}, got {d.shape}")
    if not np.allclose(d, d.T, atol=TOL, equal_nan=True):
        raise ValueError("raw cost matrix must be symmetric")
    if np.any(np.diag(d) != 0):
        raise ValueError("raw cost matrix must have a zero diagonal")
    finite = d[np.isfinite(d)]
    if np.any(finite < 0):
        raise ValueError("raw costs must be nonnegative")
    for m in range(n):
        # Floyd-Warshall relaxation through intermediate vertex m.
        d = np.minimum(d, d[:, m : m + 1] + d[m : m + 1, :])
    if not np.all(np.isfinite(d)):
        raise NotConnectedError("instance not connected")
    return MetricInstance(n=n, cost=d, k=k)


@dataclass(frozen=True)
class CutSpec:
    """A vertex cut: the nonempty proper subset ``side`` of {0..n-1}."""

    side: frozenset[int]
    n: int

    def __post_init__(self):
        side = frozenset(self.side)
        object.__setattr__(self, "side", side)
        if not side or len(side) >= self.n:
            raise ValueError(f"cut side must be a nonempty proper subset of {self.n} vertices")
        if any(v < 0 or v >= self.n for v in side):
            raise ValueError("cut side contains out-of-range vertices")

    def crosses(self, e: Edge) -> bool:
        return (e[0] in self.side) != (e[1] in self.side)


class MultiEdgeSet:
    """Multiset of undirected edges with nonnegative integer multiplicities.

    Immutable after construction; zero-multiplicity entries are dropped and
    keys are canonicalized to u < v.
    """

    __slots__ = ("multiplicity",)

    def __init__(self, multiplicity=None):
        mult: dict[Edge, int] = {}
        if multiplicity:
            for e, m in dict(multiplicity).items():
                m = int(m)
                if m < 0:
                    raise ValueError(f"negative multiplicity {m} for edge {e}")
                if m:
                    mult[make_edge(*e)] = mult.get(make_edge(*e), 0) + m
        self.multiplicity = mult

    @classmethod
    def from_pairs(cls, pairs) -> "MultiEdgeSet":
        """Build from an iterable of (u, v) pairs, counting repeats."""
        mult: dict[Edge, int] = {}
        for u, v in pairs:
            e = make_edge(u, v)
            mult[e] = mult.get(e, 0) + 1
        return cls(mult)

    def union(self, other: "MultiEdgeSet") -> "MultiEdgeSet":
        """Multiset union: multiplicities add, so |A + B| = |A| + |B|."""
        mult = dict(self.multiplicity)
        for e, m in other.multiplicity.items():
            mult[e] = mult.get(e, 0) + m
        return MultiEdgeSet(mult)

    def size(self) -> int:
        """Total edge count with multiplicity."""
        return sum(self.multiplicity.values())

    def total_cost(self, cost: np.ndarray) -> float:
        return float(sum(m * cost[e[0], e[1]] for e, m in self.multiplicity.items()))

    def vertices(self) -> set[int]:
        return {v for e in self.multiplicity for v in e}

    def __eq__(self, other):
        return isinstance(other, MultiEdgeSet) and self.multiplicity == other.multiplicity

    def __len__(self):
        return len(self.multiplicity)

    def __repr__(self):
        items = ", ".join(f"{e}x{m}" for e, m in sorted(self.multiplicity.items()))
        return f"MultiEdgeSet({{{items}}})"


def cut_size(m: MultiEdgeSet, s: CutSpec) -> int:
    """Number of multiset edges crossing the cut, counted with multiplicity."""
    return sum(mult for e, mult in m.multiplicity.items() if s.crosses(e))


def global_min_cut(weights, n: int) -> tuple[float, CutSpec]:
    """Global minimum cut of a weighted undirected graph via Stoer-Wagner.

    ``weights`` maps edges to nonnegative reals; missing edges weigh zero.
    Deterministic: every phase starts at the smallest live vertex and
    adjacency ties are broken toward the smallest vertex index.  Disconnected
    inputs yield value 0 with a witnessing side.  The witness is normalized
    to the side containing vertex 0.
    """
    if n < 2:
        raise ValueError("min cut needs at least 2 vertices")
    w = np.zeros((n, n))
    for e, wt in dict(weights).items():
        u, v = make_edge(*e)
        if wt < 0:
            raise ValueError(f"negative weight {wt} on edge {e}")
        w[u, v] += wt
        w[v, u] += wt

    groups: list[list[int]] = [[v] for v in range(n)]
    alive = list(range(n))
    best_value = np.inf
    best_side: list[int] = []
    while len(alive) > 1:
        start = alive[0]
        added = [start]
        in_order = np.zeros(n, dtype=bool)
        in_order[start] = True
        conn = w[start].copy()
        prev = start
        last = start
        for _ in range(len(alive) - 1):
            prev = last
            best = -1.0
            last = -1
            for v in alive:
                if not in_order[v] and (conn[v] > best + 1e-15):
                    best = conn[v]
                    last = v
            in_order[last] = True
            added.append(last)
            conn += w[last]
        phase_cut = float(sum(w[last, v] for v in alive if v != last))
        if phase_cut < best_value - 1e-15:
            best_value = phase_cut
            best_side = list(groups[last])
        # contract last into prev (prev keeps the merged supervertex)
        w[prev] += w[last]
        w[:, prev] += w[:, last]
        w[prev, prev] = 0.0
        w[last, :] = 0.0
        w[:, last] = 0.0
        groups[prev].extend(groups[last])
        alive.remove(last)

    side = frozenset(best_side)
    if 0 not in side:
        side = frozenset(range(n)) - side
    return best_value, CutSpec(side=side, n=n)
