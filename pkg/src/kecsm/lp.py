"""Cutting-plane and full-enumeration solvers for the degree-k cut relaxation.

The relaxation minimizes total edge cost subject to fractional degree exactly
k at every vertex, every cut carrying at least k, and nonnegative edge values.
Cut constraints are generated lazily from a global-min-cut separation oracle;
a materialized-constraint variant serves as ground truth on tiny instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CutSpec, Edge, MetricInstance, global_min_cut

# A cut is treated as violated when it carries less than k minus this slack.
SEPARATION_TOL = 1e-7


class LPError(RuntimeError):
    """Base class for relaxation solver failures."""


class InfeasibleLPError(LPError):
    pass


class UnboundedLPError(LPError):
    pass


class LPNotConvergedError(LPError):
    """Cut generation hit its iteration cap; carries the partial report."""

    def __init__(self, message: str, report: "LPReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class FractionalSolution:
    """Edge values x >= 0 with degree exactly k everywhere and all cuts >= k."""

    values: dict[Edge, float]
    objective: float

    def as_array(self, edges: list[Edge]) -> np.ndarray:
        return np.array([self.values.get(e, 0.0) for e in edges])


@dataclass(frozen=True)
class LPReport:
    objective: float
    iterations: int
    cuts_added: int
    separation_slack: float


def simplex_min(c, a_eq=None, b_eq=None, a_ge=None, b_ge=None,
                tol: float = 1e-9, max_pivots: int = 200_000):
    """Two-phase primal simplex on a dense tableau.

    Minimizes c.x subject to a_eq x = b_eq, a_ge x >= b_ge, x >= 0.  Pricing
    is Dantzig's rule with a permanent switch to Bland's rule once the
    objective stalls, which rules out cycling.  Ties in the ratio test go to
    the smallest basis index, so the pivot sequence is deterministic.

    Returns (x, objective).
    """
    c = np.asarray(c, dtype=float)
    nv = c.size
    a_eq = np.zeros((0, nv)) if a_eq is None else np.asarray(a_eq, dtype=float).reshape(-1, nv)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    a_ge = np.zeros((0, nv)) if a_ge is None else np.asarray(a_ge, dtype=float).reshape(-1, nv)
    b_ge = np.zeros(0) if b_ge is None else np.asarray(b_ge, dtype=float).ravel()

    a_eq = a_eq.copy()
    b_eq = b_eq.copy()
    flip = b_eq < 0
    a_eq[flip] *= -1.0
    b_eq[flip] *= -1.0
    if np.any(b_ge < 0):
        raise ValueError("surplus-form rows require nonnegative right-hand sides")

    m_eq, m_ge = b_eq.size, b_ge.size
    m = m_eq + m_ge
    n_cols = nv + m_ge + m  # structural, surplus, artificial
    art_start = nv + m_ge

    t = np.zeros((m + 2, n_cols + 1))
    t[:m_eq, :nv] = a_eq
    t[:m_eq, -1] = b_eq
    t[m_eq:m, :nv] = a_ge
    t[m_eq:m, -1] = b_ge
    for i in range(m_ge):
        t[m_eq + i, nv + i] = -1.0
    for i in range(m):
        t[i, art_start + i] = 1.0
    basis = list(range(art_start, art_start + m))
    t[m, :nv] = c
    # phase-1 reduced costs after eliminating the basic artificials
    t[m + 1, :art_start] = -t[:m, :art_start].sum(axis=0)
    t[m + 1, -1] = -t[:m, -1].sum()

    pivots = 0

    def pivot(row: int, col: int):
        t[row] /= t[row, col]
        column = t[:, col].copy()
        column[row] = 0.0
        t[:, :] -= np.outer(column, t[row])
        t[:, col] = 0.0
        t[row, col] = 1.0
        basis[row] = col

    def run(obj_row: int, allow_until: int):
        nonlocal pivots
        bland = False
        stall = 0
        while True:
            red = t[obj_row, :allow_until]
            if bland:
                negs = np.nonzero(red < -tol)[0]
                if negs.size == 0:
                    return
                col = int(negs[0])
            else:
                col = int(np.argmin(red))
                if red[col] >= -tol:
                    return
            pivcol = t[: len(basis), col]
            rhs = t[: len(basis), -1]
            best_ratio = np.inf
            row = -1
            for i in range(len(basis)):
                if pivcol[i] > tol:
                    ratio = rhs[i] / pivcol[i]
                    if ratio < best_ratio - 1e-12 or (
                        abs(ratio - best_ratio) <= 1e-12 and (row < 0 or basis[i] < basis[row])
                    ):
                        best_ratio = ratio
                        row = i
            if row < 0:
                raise UnboundedLPError("objective unbounded below")
            before = t[obj_row, -1]
            pivot(row, col)
            pivots += 1
            if pivots > max_pivots:
                raise LPError("simplex pivot limit exceeded")
            stall = stall + 1 if abs(t[obj_row, -1] - before) < 1e-12 else 0
            if stall > 30:
                bland = True

    # phase 1: drive the artificial variables to zero
    run(m + 1, art_start)
    feas_tol = 1e-7 * max(1.0, float(np.max(np.abs(t[: len(basis), -1]))) if m else 1.0)
    if -t[m + 1, -1] > feas_tol:
        raise InfeasibleLPError(f"no feasible point (phase-1 residual {-t[m + 1, -1]:.3g})")

    # pivot leftover artificials out of the basis; drop redundant rows
    drop = []
    for i in range(len(basis)):
        if basis[i] >= art_start:
            cols = np.nonzero(np.abs(t[i, :art_start]) > tol)[0]
            if cols.size:
                pivot(i, int(cols[0]))
            else:
                drop.append(i)
    if drop:
        keep = [i for i in range(t.shape[0]) if i not in drop]
        t = t[keep]
        basis = [b for i, b in enumerate(basis) if i not in drop]

    t[:, art_start:-1] = 0.0  # artificials are retired
    run(t.shape[0] - 2, art_start)

    x = np.zeros(nv)
    for i, b in enumerate(basis):
        if b < nv:
            x[b] = t[i, -1]
    x[np.abs(x) < 1e-12] = 0.0
    return x, float(c @ x)


def separate(x: dict[Edge, float], k: float, n: int) -> CutSpec | None:
    """Most-violated cut of the fractional solution, or None when all cuts carry >= k.

    The most-violated cut under x is exactly the global minimum cut, so one
    min-cut call decides separation.
    """
    value, spec = global_min_cut(x, n)
    return spec if value < k - SEPARATION_TOL else None


def _degree_rows(edges: list[Edge], n: int) -> np.ndarray:
    rows = np.zeros((n, len(edges)))
    for j, (u, v) in enumerate(edges):
        rows[u, j] = 1.0
        rows[v, j] = 1.0
    return rows


def _cut_row(edges: list[Edge], side: frozenset[int]) -> np.ndarray:
    row = np.zeros(len(edges))
    for j, (u, v) in enumerate(edges):
        if (u in side) != (v in side):
            row[j] = 1.0
    return row


def solve_lp(inst: MetricInstance, max_cuts: int = 10_000) -> tuple[FractionalSolution, LPReport]:
    """Solve the relaxation by cut generation.

    Starts from the degree equalities alone and repeatedly adds the most
    violated cut until the separation oracle is silent.  Deterministic: the
    simplex pivot order and the min-cut witness are both index-tie-broken.
    """
    edges = inst.edges()
    cost = np.array([inst.edge_cost(e) for e in edges])
    k = float(inst.k)
    a_eq = _degree_rows(edges, inst.n)
    b_eq = np.full(inst.n, k)

    cut_sides: list[frozenset[int]] = []
    seen: set[frozenset[int]] = set()
    iterations = 0
    while True:
        iterations += 1
        a_ge = np.array([_cut_row(edges, s) for s in cut_sides]).reshape(len(cut_sides), len(edges))
        b_ge = np.full(len(cut_sides), k)
        x, obj = simplex_min(cost, a_eq, b_eq, a_ge, b_ge)
        xmap = {e: float(v) for e, v in zip(edges, x)}
        violated = separate(xmap, k, inst.n)
        if violated is None:
            value, _ = global_min_cut(xmap, inst.n)
            report = LPReport(
                objective=obj,
                iterations=iterations,
                cuts_added=len(cut_sides),
                separation_slack=float(k - value),
            )
            return FractionalSolution(values=xmap, objective=obj), report
        if violated.side in seen or len(cut_sides) >= max_cuts:
            report = LPReport(
                objective=obj,
                iterations=iterations,
                cuts_added=len(cut_sides),
                separation_slack=float("nan"),
            )
            raise LPNotConvergedError("LP did not converge", report)
        seen.add(violated.side)
        cut_sides.append(violated.side)


def solve_lp_enumeration(inst: MetricInstance, max_n: int = 12) -> FractionalSolution:
    """Ground-truth solve with every cut constraint materialized.

    Enumerates all 2^(n-1) - 1 cuts, so it is restricted to n <= 12.
    """
    if inst.n > max_n:
        raise ValueError(f"enumeration LP limited to n <= {max_n}, got n={inst.n}")
    edges = inst.edges()
    cost = np.array([inst.edge_cost(e) for e in edges])
    k = float(inst.k)
    a_eq = _degree_rows(edges, inst.n)
    b_eq = np.full(inst.n, k)

    # every cut exactly once: sides containing vertex 0, excluding the full set
    sides = []
    for mask in range(0, (1 << (inst.n - 1)) - 1):
        sides.append(frozenset({0} | {v for v in range(1, inst.n) if mask >> (v - 1) & 1}))
    a_ge = np.array([_cut_row(edges, s) for s in sides])
    b_ge = np.full(len(sides), k)
    x, obj = simplex_min(cost, a_eq, b_eq, a_ge, b_ge)
    return FractionalSolution(values={e: float(v) for e, v in zip(edges, x)}, objective=obj)
