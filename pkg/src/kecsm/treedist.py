"""Weighted spanning-tree distributions: marginals, counting, max-entropy fitting.

A positive edge-weight vector lam induces the tree law with probability
proportional to the product of tree-edge weights.  Edge marginals come from
the matrix-tree identity p_e = lam_e * R_eff(e); fitting searches for weights
whose marginals match a target tree-polytope point to within a one-sided
relative slack.

Targets on the polytope boundary have no finite-weight representation, so the
fitter decomposes them: an edge at z = 1 is contracted, and more generally a
tight vertex set S with z(E(S)) = |S| - 1 splits the law into independent
inside/outside factors, each fitted on its own piece.  Sampling a tree per
piece and merging is exact for the factored law, and a union of independent
weighted-tree pieces keeps every cut count a sum of independent Bernoullis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import Edge, NotConnectedError, make_edge
from .split import TreePolytopePoint

# z at or above this is pinned into every tree; at or below the floor it is dropped.
FORCED_Z = 1.0 - 1e-9
DELETED_Z = 1e-12
# slack accepted when testing z(E(S)) = |S| - 1 for tight-set decomposition
TIGHT_SET_TOL = 1e-8


class FitConvergenceError(RuntimeError):
    """Marginal fitting failed to reach its slack within the update budget."""

    def __init__(self, message: str, max_ratio: float, sweeps: int):
        super().__init__(message)
        self.max_ratio = max_ratio
        self.sweeps = sweeps


@dataclass(frozen=True)
class EdgeGraph:
    """Multigraph as an explicit edge list; parallel edges are distinct entries."""

    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        for a, b in self.edges:
            if a == b or not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"bad edge ({a},{b}) for n={self.n}")


def graph_of_split(g0) -> EdgeGraph:
    """Tree-layer view of a split graph."""
    return EdgeGraph(n=g0.n0, edges=tuple(g0.edges))


def _components(n: int, edges) -> list[int]:
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = [find(v) for v in range(n)]
    relabel: dict[int, int] = {}
    for r in roots:
        if r not in relabel:
            relabel[r] = len(relabel)
    return [relabel[r] for r in roots]


def is_connected(graph: EdgeGraph, active=None) -> bool:
    edges = [graph.edges[i] for i in active] if active is not None else graph.edges
    return max(_components(graph.n, edges)) == 0


def weighted_laplacian(graph: EdgeGraph, lam: np.ndarray) -> np.ndarray:
    lap = np.zeros((graph.n, graph.n))
    for i, (a, b) in enumerate(graph.edges):
        w = lam[i]
        lap[a, a] += w
        lap[b, b] += w
        lap[a, b] -= w
        lap[b, a] -= w
    return lap


def _grounded_inverse(graph: EdgeGraph, lam: np.ndarray) -> np.ndarray:
    """Inverse of the Laplacian with vertex 0 grounded (dense Cholesky)."""
    lap = weighted_laplacian(graph, lam)
    reduced = lap[1:, 1:]
    try:
        factor = cho_factor(reduced)
    except np.linalg.LinAlgError as exc:
        raise NotConnectedError(f"weight support is disconnected or singular: {exc}") from exc
    return cho_solve(factor, np.eye(graph.n - 1))


def _pair_resistances(inv: np.ndarray, edges) -> np.ndarray:
    out = np.empty(len(edges))
    for i, (a, b) in enumerate(edges):
        if a == 0:
            out[i] = inv[b - 1, b - 1]
        elif b == 0:
            out[i] = inv[a - 1, a - 1]
        else:
            out[i] = inv[a - 1, a - 1] + inv[b - 1, b - 1] - 2.0 * inv[a - 1, b - 1]
    return out


@dataclass(frozen=True)
class MarginalVector:
    """Edge marginals of a weighted tree law; they must sum to n - 1."""

    graph: EdgeGraph
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).copy()
        p.flags.writeable = False
        object.__setattr__(self, "p", p)
        total = float(p.sum())
        if abs(total - (self.graph.n - 1)) > 1e-9:
            raise ArithmeticError(
                f"marginals sum to {total}, expected {self.graph.n - 1} (matrix-tree identity)"
            )

    def as_dict(self) -> dict[int, float]:
        return {i: float(v) for i, v in enumerate(self.p)}


def effective_resistance(lam, graph: EdgeGraph, e) -> float:
    """Effective resistance across edge ``e`` (an index or an endpoint pair)."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("edge weights must be positive")
    a, b = graph.edges[e] if isinstance(e, (int, np.integer)) else make_edge(*e)
    inv = _grounded_inverse(graph, lam)
    return float(_pair_resistances(inv, [(a, b)])[0])


def tree_marginals(lam, graph: EdgeGraph) -> MarginalVector:
    """Marginal inclusion probability of every edge under the weighted tree law."""
    lam = np.asarray(lam, dtype=float)
    if lam.size != len(graph.edges):
        raise ValueError("one weight per edge required")
    if np.any(lam <= 0):
        raise ValueError("edge weights must be positive")
    if graph.n == 1:
        return MarginalVector(graph=graph, p=np.zeros(0))
    inv = _grounded_inverse(graph, lam)
    p = lam * _pair_resistances(inv, graph.edges)
    return MarginalVector(graph=graph, p=p)


def spanning_tree_count(lam, graph: EdgeGraph) -> float:
    """Weighted spanning-tree count: any cofactor of the weighted Laplacian."""
    lam = np.asarray(lam, dtype=float)
    if graph.n == 1:
        return 1.0
    lap = weighted_laplacian(graph, lam)
    return float(np.linalg.det(lap[1:, 1:]))


@dataclass(frozen=True)
class Contraction:
    """Forced edges contracted away and dropped edges removed from a graph."""

    graph: EdgeGraph
    kept: tuple[int, ...]
    vmap: tuple[int, ...]
    loops: tuple[int, ...]


def contract_edges(graph: EdgeGraph, forced, deleted) -> Contraction:
    """Contract ``forced`` edges, drop ``deleted`` ones, and relabel vertices.

    Component labels follow the smallest original vertex, so the reduced
    graph is deterministic.  Edges that close a contracted component become
    loops and are excluded from the reduced edge list.
    """
    forced = set(forced)
    deleted = set(deleted)
    vmap = _components(graph.n, [graph.edges[i] for i in sorted(forced)])
    kept: list[int] = []
    reduced_edges: list[Edge] = []
    loops: list[int] = []
    for i, (a, b) in enumerate(graph.edges):
        if i in forced or i in deleted:
            continue
        ra, rb = vmap[a], vmap[b]
        if ra == rb:
            loops.append(i)
            continue
        kept.append(i)
        reduced_edges.append(make_edge(ra, rb))
    nc = max(vmap) + 1
    return Contraction(
        graph=EdgeGraph(n=nc, edges=tuple(reduced_edges)),
        kept=tuple(kept),
        vmap=tuple(vmap),
        loops=tuple(loops),
    )


@dataclass(frozen=True)
class SamplingPiece:
    """One independent factor of a fitted tree law.

    ``graph`` is a connected local multigraph, ``lam`` its positive weights,
    and ``kept[j]`` the original edge index of local edge j.  A spanning tree
    of every piece plus all forced edges is a spanning tree of the original
    graph.
    """

    graph: EdgeGraph
    lam: np.ndarray
    kept: tuple[int, ...]


@dataclass(frozen=True)
class LambdaWeights:
    """Fitted weights whose tree law has marginals dominated by the target z.

    ``lam`` holds per-edge weights (scales only meaningful within a piece),
    1.0 placeholders on forced edges and 0.0 on deleted ones.  Sampling uses
    ``pieces``: independent weighted-tree factors plus the forced edges.
    """

    graph: EdgeGraph
    lam: np.ndarray
    fitted_marginals: np.ndarray
    forced: tuple[int, ...]
    deleted: tuple[int, ...]
    epsilon_marginal: float
    sweeps: int
    max_ratio: float
    pieces: tuple[SamplingPiece, ...]

    def __post_init__(self):
        for name in ("lam", "fitted_marginals"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def _induced_tight_set(graph: EdgeGraph, z: np.ndarray, lam: np.ndarray):
    """Search for a proper vertex set S with z(E(S)) >= |S| - 1 - tol.

    Heavily weighted edges cluster inside tight sets, so candidates are the
    components formed while merging edges in decreasing lam order; each merge
    yields one candidate component to test.  Returns the vertex list or None.
    """
    order = sorted(range(len(graph.edges)), key=lambda i: (-lam[i], i))
    parent = list(range(graph.n))
    members: dict[int, set[int]] = {v: {v} for v in range(graph.n)}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i in order:
        a, b = graph.edges[i]
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        if len(members[ra]) < len(members[rb]):
            ra, rb = rb, ra
        parent[rb] = ra
        members[ra] |= members.pop(rb)
        comp = members[ra]
        if len(comp) < 2 or len(comp) >= graph.n:
            continue
        internal = sum(
            float(z[j]) for j, (u, w) in enumerate(graph.edges) if u in comp and w in comp
        )
        if internal >= len(comp) - 1 - TIGHT_SET_TOL * max(1, len(comp) - 1):
            return sorted(comp)
    return None


def _fit_interior(graph: EdgeGraph, z: np.ndarray, eps: float, state: dict):
    """Fit one connected piece, decomposing on tight sets when they surface.

    Returns (lam, p, pieces) with lam/p indexed by this graph's edges and
    pieces carrying local edge indices into this graph.
    """
    m = len(graph.edges)
    lam = np.ones(m)
    sweeps_here = 0
    while True:
        try:
            p = tree_marginals(lam, graph).p
        except ArithmeticError as exc:
            raise FitConvergenceError(
                f"marginal computation lost precision after {state['sweeps']} sweeps: {exc}",
                max_ratio=state["max_ratio"],
                sweeps=state["sweeps"],
            ) from exc
        max_ratio = float((p / z).max())
        state["max_ratio"] = max_ratio
        if max_ratio <= 1.0 + eps:
            piece = SamplingPiece(graph=graph, lam=lam.copy(), kept=tuple(range(m)))
            return lam, p, [piece]
        spread = float(lam.max() / lam.min())
        if sweeps_here >= 3 and (sweeps_here % 10 == 0 or spread > 1e5):
            tight = _induced_tight_set(graph, z, lam)
            if tight is not None:
                return _fit_split(graph, z, eps, state, tight)
        if state["sweeps"] * m >= state["max_updates"]:
            raise FitConvergenceError(
                f"marginal fitting stalled at max ratio {max_ratio:.3e} "
                f"after {state['sweeps']} sweeps",
                max_ratio=max_ratio,
                sweeps=state["sweeps"],
            )
        lam = lam * (z / p)
        lam /= np.exp(np.mean(np.log(lam)))
        sweeps_here += 1
        state["sweeps"] += 1


def _fit_split(graph: EdgeGraph, z: np.ndarray, eps: float, state: dict, tight: list[int]):
    """Factor the law at a tight vertex set: fit inside and outside independently."""
    inside_v = set(tight)
    rank = {v: r for r, v in enumerate(tight)}
    inner_idx = [i for i, (a, b) in enumerate(graph.edges) if a in inside_v and b in inside_v]
    outer_idx = [i for i in range(len(graph.edges)) if i not in set(inner_idx)]

    inner_graph = EdgeGraph(
        n=len(tight),
        edges=tuple(make_edge(rank[a], rank[b]) for i in inner_idx
                    for (a, b) in [graph.edges[i]]),
    )
    # outside: contract the tight set to one vertex at its representative's rank
    rep = min(tight)
    keys = sorted([rep] + [v for v in range(graph.n) if v not in inside_v])
    label_of = {v: i for i, v in enumerate(keys)}
    vmap = [label_of[rep] if v in inside_v else label_of[v] for v in range(graph.n)]
    outer_graph = EdgeGraph(
        n=graph.n - len(tight) + 1,
        edges=tuple(make_edge(vmap[a], vmap[b]) for i in outer_idx
                    for (a, b) in [graph.edges[i]]),
    )

    lam = np.zeros(len(graph.edges))
    p = np.zeros(len(graph.edges))
    pieces: list[SamplingPiece] = []
    for idx, sub in ((inner_idx, inner_graph), (outer_idx, outer_graph)):
        sub_lam, sub_p, sub_pieces = _fit_interior(sub, z[idx], eps, state)
        lam[idx] = sub_lam
        p[idx] = sub_p
        for piece in sub_pieces:
            pieces.append(SamplingPiece(
                graph=piece.graph,
                lam=piece.lam,
                kept=tuple(idx[j] for j in piece.kept),
            ))
    return lam, p, pieces


def fit_max_entropy(z: TreePolytopePoint, epsilon_marginal: float = 1e-6,
                    max_iters: int = 100_000) -> LambdaWeights:
    """Fit weights so every edge marginal is at most z_e * (1 + epsilon_marginal).

    Multiplicative fixed-point scheme: each sweep recomputes all marginals,
    then rescales every weight by z_e / p_e and renormalizes the geometric
    mean to 1.  Boundary targets are decomposed (contracted z=1 edges, tight
    vertex sets) into independent pieces fitted separately.  ``max_iters``
    counts coordinate updates (sweeps times edges).
    """
    graph = EdgeGraph(n=z.n, edges=z.edges)
    zv = np.asarray(z.z, dtype=float)
    if np.any(zv < -1e-9) or np.any(zv > 1.0 + 1e-9):
        raise ValueError("z outside polytope: entries must lie in [0, 1]")
    if abs(zv.sum() - (z.n - 1)) > 1e-6:
        raise ValueError(f"z outside polytope: total {zv.sum():.9f} != {z.n - 1}")

    forced = tuple(int(i) for i in np.nonzero(zv >= FORCED_Z)[0])
    deleted = tuple(int(i) for i in np.nonzero(zv <= DELETED_Z)[0])
    red = contract_edges(graph, forced, deleted)
    if any(zv[i] > 1e-6 for i in red.loops):
        raise ValueError("z outside polytope: positive value on a forced cycle chord")
    deleted = tuple(sorted(set(deleted) | set(red.loops)))
    if not is_connected(red.graph):
        raise NotConnectedError("support of z does not connect the graph")

    lam_full = np.zeros(len(graph.edges))
    lam_full[list(forced)] = 1.0
    marg_full = np.zeros(len(graph.edges))
    marg_full[list(forced)] = 1.0

    kept = list(red.kept)
    state = {"sweeps": 0, "max_ratio": 0.0, "max_updates": max(1, max_iters)}
    pieces: tuple[SamplingPiece, ...] = ()
    if kept:
        lam_red, p_red, red_pieces = _fit_interior(red.graph, zv[kept], epsilon_marginal, state)
        lam_full[kept] = lam_red
        marg_full[kept] = p_red
        pieces = tuple(
            SamplingPiece(graph=pc.graph, lam=pc.lam, kept=tuple(kept[j] for j in pc.kept))
            for pc in red_pieces
        )

    return LambdaWeights(
        graph=graph,
        lam=lam_full,
        fitted_marginals=marg_full,
        forced=forced,
        deleted=deleted,
        epsilon_marginal=epsilon_marginal,
        sweeps=state["sweeps"],
        max_ratio=float((marg_full[kept] / zv[kept]).max()) if kept else 0.0,
        pieces=pieces,
    )
