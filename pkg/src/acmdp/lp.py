"""Dense linear-programming kernel.

Solves min c'x s.t. Ax = b, x >= 0 with a two-phase primal simplex using
Bland's smallest-index rule (deterministic, cycle-free), and provides an
independent exhaustive basic-feasible-solution enumerator used as an oracle
in tests.  Both return primal and dual solutions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationGuardError, InternalInconsistencyError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds shared across the solver stack."""

    feas_tol: float = 1e-9
    opt_tol: float = 1e-9
    gap_tol: float = 1e-8
    pivot_tol: float = 1e-10


DEFAULT_TOLS = Tolerances()


@dataclass(frozen=True, eq=False)
class StandardLP:
    """Equality-form LP: minimize objective'x subject to matrix @ x = rhs, x >= 0."""

    objective: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        a = np.asarray(self.matrix, dtype=float)
        b = np.asarray(self.rhs, dtype=float).reshape(-1)
        if a.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        m, n = a.shape
        if c.shape != (n,):
            raise ValueError(f"objective length {c.shape[0]} does not match {n} columns")
        if b.shape != (m,):
            raise ValueError(f"rhs length {b.shape[0]} does not match {m} rows")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("LP data must be finite")
        for arr, name in ((c, "objective"), (a, "matrix"), (b, "rhs")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class LPSolution:
    """Solver outcome.  x, y, objective_value, basis are set when optimal;
    ray is a feasible descent direction when unbounded."""

    status: str
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    objective_value: float | None = None
    basis: tuple[int, ...] = ()
    ray: np.ndarray | None = None
    dual_degenerate: bool = False
    iterations: int = 0


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    others = tableau[:, col].copy()
    others[row] = 0.0
    tableau -= np.outer(others, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0


def _bland(tableau, basis, cost, tols, ban_from=None, max_iter=100000):
    """Run Bland-rule simplex on a tableau with a feasible basis.

    Returns (status, entering_col, iterations); entering_col is set when the
    status is unbounded.  Columns at or beyond ban_from are barred from
    entering once they leave the basis.
    """
    n_cols = tableau.shape[1] - 1
    banned = np.zeros(n_cols, dtype=bool)
    for it in range(max_iter):
        reduced = cost - cost[basis] @ tableau[:, :n_cols]
        candidates = np.nonzero(reduced < -tols.opt_tol)[0]
        if ban_from is not None and candidates.size:
            candidates = candidates[~banned[candidates]]
        if candidates.size == 0:
            return OPTIMAL, None, it
        j = int(candidates[0])
        col = tableau[:, j]
        eligible = np.nonzero(col > tols.pivot_tol)[0]
        if eligible.size == 0:
            return UNBOUNDED, j, it
        ratios = tableau[eligible, -1] / col[eligible]
        r_min = float(ratios.min())
        near = eligible[ratios <= r_min + 1e-12 * (1.0 + abs(r_min))]
        basis_arr = np.asarray(basis)
        row = int(near[np.argmin(basis_arr[near])])
        leaving = basis[row]
        _pivot(tableau, row, j)
        basis[row] = j
        if ban_from is not None and leaving >= ban_from:
            banned[leaving] = True
    raise InternalInconsistencyError("simplex exceeded its iteration budget")


def _drive_out_artificials(tableau, basis, n_orig, tols):
    """Pivot zero-level artificial variables out of the basis.

    Rows whose artificial cannot be replaced are linearly dependent on the
    rest and are flagged for deletion.  Returns a keep mask over rows.
    """
    m = tableau.shape[0]
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] < n_orig:
            continue
        row = tableau[r, :n_orig]
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) <= tols.pivot_tol:
            keep[r] = False
            continue
        tableau[r, -1] = 0.0
        _pivot(tableau, r, j)
        basis[r] = j
    return keep


def solve_simplex(lp: StandardLP, tols: Tolerances = DEFAULT_TOLS) -> LPSolution:
    """Two-phase primal simplex with Bland's rule.

    When optimal, the final basis is re-solved directly against the original
    rows, so the returned primal, dual, and objective satisfy feasibility,
    dual feasibility, and complementary slackness to near machine precision.
    Redundant equality rows are detected in phase 1 and carry dual value 0.
    Identical inputs produce identical outputs.
    """
    m, n = lp.n_rows, lp.n_cols
    a = lp.matrix.copy()
    b = lp.rhs.copy()
    c = lp.objective
    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0

    tableau = np.hstack([a, np.eye(m), b[:, None]])
    basis = list(range(n, n + m))
    phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
    max_iter = max(20000, 500 * (m + n))
    status1, _, it1 = _bland(tableau, basis, phase1_cost, tols, ban_from=n, max_iter=max_iter)
    if status1 != OPTIMAL:
        raise InternalInconsistencyError("phase 1 is bounded below yet did not terminate optimal")
    phase1_value = float(phase1_cost[basis] @ tableau[:, -1])
    if phase1_value > tols.feas_tol:
        return LPSolution(status=INFEASIBLE, iterations=it1)

    keep = _drive_out_artificials(tableau, basis, n, tols)
    kept_rows = np.nonzero(keep)[0]
    tableau = np.hstack([tableau[keep][:, :n], tableau[keep][:, -1:]])
    basis = [basis[r] for r in kept_rows]

    status2, enter, it2 = _bland(tableau, basis, c, tols, max_iter=max_iter)
    iterations = it1 + it2
    if status2 == UNBOUNDED:
        ray = np.zeros(n)
        ray[enter] = 1.0
        for r, j in enumerate(basis):
            ray[j] = -tableau[r, enter]
        return LPSolution(status=UNBOUNDED, ray=ray, iterations=iterations)

    x = np.zeros(n)
    x[basis] = tableau[:, -1]
    y = np.zeros(m)
    a_kept = lp.matrix[kept_rows]
    b_kept = lp.rhs[kept_rows]
    basis_mat = a_kept[:, basis]
    try:
        x_b = np.linalg.solve(basis_mat, b_kept)
        y_kept = np.linalg.solve(basis_mat.T, c[basis])
    except np.linalg.LinAlgError:
        x_b = np.linalg.lstsq(basis_mat, b_kept, rcond=None)[0]
        y_kept = np.linalg.lstsq(basis_mat.T, c[basis], rcond=None)[0]
    x_refined = np.zeros(n)
    x_refined[basis] = x_b
    if (
        np.all(x_refined >= -tols.feas_tol)
        and np.max(np.abs(lp.matrix @ x_refined - lp.rhs)) <= tols.feas_tol
    ):
        x = x_refined
    y[kept_rows] = y_kept

    reduced = c - lp.matrix.T @ y
    value = float(c @ x)
    gap = abs(value - float(lp.rhs @ y))
    if (
        np.min(reduced) < -tols.opt_tol
        or np.max(np.abs(lp.matrix @ x - lp.rhs)) > tols.feas_tol
        or np.min(x) < -tols.feas_tol
        or gap > tols.gap_tol
    ):
        raise InternalInconsistencyError(
            "simplex terminated with a certificate outside tolerance "
            f"(feas {np.max(np.abs(lp.matrix @ x - lp.rhs)):.3e}, "
            f"dual feas {np.min(reduced):.3e}, gap {gap:.3e})"
        )
    nonbasic = np.ones(n, dtype=bool)
    nonbasic[list(basis)] = False
    degenerate = bool(np.any(np.abs(reduced[nonbasic]) <= tols.opt_tol))
    return LPSolution(
        status=OPTIMAL,
        x=x,
        y=y,
        objective_value=value,
        basis=tuple(sorted(basis)),
        dual_degenerate=degenerate,
        iterations=iterations,
    )


def polish_dual(
    lp: StandardLP,
    sol: LPSolution,
    tols: Tolerances = DEFAULT_TOLS,
    cap: float = 1.0,
    pos_tol: float = 1e-10,
) -> LPSolution:
    """Move an optimal dual vector toward the interior of the optimal face.

    A basis dual gives every basic column a reduced cost of exactly zero,
    including columns that are basic at level zero, so it overstates the set
    of tight dual constraints.  For each mass-free column whose reduced cost
    is zero, a secondary LP looks for an optimal dual making that one column
    strictly slack (reduced cost maximized, capped at `cap`, subject to
    tightness on every column carrying primal mass).  Averaging the witness
    duals keeps every individually-achievable slack strictly positive, so
    only columns tight in every optimal dual, i.e. columns of alternative
    optima, stay at zero.  The polished vector replaces sol.y only if it
    passes the dual-feasibility and gap checks; otherwise sol is returned
    unchanged.
    """
    if sol.status != OPTIMAL:
        return sol
    a, b, c = lp.matrix, lp.rhs, lp.objective
    m, n = a.shape
    carrying = sol.x > pos_tol
    reduced = c - a.T @ sol.y
    tight = np.nonzero(~carrying & (reduced <= tols.opt_tol))[0]
    if tight.size == 0:
        return sol
    free_cols = np.nonzero(~carrying)[0]
    n0 = free_cols.size
    slack_col = {int(j): 2 * m + k for k, j in enumerate(free_cols)}
    # shared rows: tightness on carrying columns, slack on the rest
    # variable blocks: y+ (m) | y- (m) | s (n0) | u | w | z
    nv = 2 * m + n0 + 3
    base = np.zeros((n, nv))
    rhs = np.empty(n + 2)
    for j in range(n):
        base[j, :m] = a[:, j]
        base[j, m : 2 * m] = -a[:, j]
        if j in slack_col:
            base[j, slack_col[j]] = 1.0
        rhs[j] = c[j]
    rhs[n] = 0.0
    rhs[n + 1] = cap
    obj = np.zeros(nv)
    obj[2 * m + n0] = -1.0
    witnesses = [sol.y]
    iterations = sol.iterations
    for j in tight:
        mat = np.vstack([base, np.zeros((2, nv))])
        mat[n, 2 * m + n0] = 1.0
        mat[n, slack_col[int(j)]] = -1.0
        mat[n, 2 * m + n0 + 1] = 1.0
        mat[n + 1, 2 * m + n0] = 1.0
        mat[n + 1, 2 * m + n0 + 2] = 1.0
        try:
            inner = solve_simplex(StandardLP(objective=obj, matrix=mat, rhs=rhs), tols)
        except InternalInconsistencyError:
            continue
        if inner.status != OPTIMAL:
            continue
        witnesses.append(inner.x[:m] - inner.x[m : 2 * m])
        iterations += inner.iterations
    if len(witnesses) == 1:
        return sol
    y_new = np.mean(witnesses, axis=0)
    if float(np.min(c - a.T @ y_new)) < -tols.opt_tol:
        return sol
    if abs(float(c @ sol.x) - float(b @ y_new)) > tols.gap_tol:
        return sol
    return LPSolution(
        status=OPTIMAL,
        x=sol.x,
        y=y_new,
        objective_value=sol.objective_value,
        basis=sol.basis,
        ray=None,
        dual_degenerate=sol.dual_degenerate,
        iterations=iterations,
    )


def _independent_rows(a: np.ndarray) -> list[int]:
    """Greedy deterministic selection of a maximal independent row subset."""
    rows: list[int] = []
    rank = 0
    for i in range(a.shape[0]):
        cand = a[rows + [i]]
        if np.linalg.matrix_rank(cand) > rank:
            rows.append(i)
            rank += 1
    return rows


def _enumeration_guard(n: int, r: int) -> None:
    if n > 24:
        raise EnumerationGuardError(f"{n} columns exceeds the enumeration limit of 24")
    combos = math.comb(n, r)
    if combos > 10**6:
        raise EnumerationGuardError(
            f"C({n},{r}) = {combos} bases exceeds the enumeration limit of 10^6"
        )


def _feasible_bases(a_r: np.ndarray, b_r: np.ndarray, feas_tol: float):
    """Yield (cols, basic_solution) for every feasible basis of a full-row-rank
    system a_r x = b_r, x >= 0, in lexicographic column order."""
    r, n = a_r.shape
    for cols in itertools.combinations(range(n), r):
        sub = a_r[:, cols]
        try:
            x_b = np.linalg.solve(sub, b_r)
        except np.linalg.LinAlgError:
            continue
        if np.min(x_b) >= -feas_tol:
            yield cols, x_b


def enumerate_bfs_optimum(lp: StandardLP, tols: Tolerances = DEFAULT_TOLS) -> LPSolution:
    """Exhaustive oracle: enumerate every basis of the constraint rows.

    Keeps feasible basic solutions and returns the minimum-objective one,
    checking unboundedness by enumerating the vertices of the normalized
    recession polytope {d : Ad = 0, sum d = 1, d >= 0}.  Refuses instances
    beyond 24 columns or 10^6 candidate bases.  Completely independent of
    solve_simplex.
    """
    m, n = lp.n_rows, lp.n_cols
    a, b, c = lp.matrix, lp.rhs, lp.objective
    rank_a = np.linalg.matrix_rank(a)
    if np.linalg.matrix_rank(np.hstack([a, b[:, None]])) > rank_a:
        return LPSolution(status=INFEASIBLE)
    sel = _independent_rows(a)
    a_r, b_r = a[sel], b[sel]
    _enumeration_guard(n, len(sel))

    best_val = math.inf
    ties: list[tuple[tuple[int, ...], np.ndarray]] = []
    for cols, x_b in _feasible_bases(a_r, b_r, tols.feas_tol):
        val = float(c[list(cols)] @ x_b)
        if val < best_val - 1e-10:
            best_val = val
            ties = [(cols, x_b)]
        elif val <= best_val + 1e-10:
            ties.append((cols, x_b))
    if not ties:
        return LPSolution(status=INFEASIBLE)

    rec_a = np.vstack([a_r, np.ones(n)])
    rec_b = np.zeros(len(sel) + 1)
    rec_b[-1] = 1.0
    rec_sel = _independent_rows(rec_a)
    _enumeration_guard(n, len(rec_sel))
    scale = 1.0 + float(np.max(np.abs(c)))
    for cols, d_b in _feasible_bases(rec_a[rec_sel], rec_b[rec_sel], tols.feas_tol):
        if float(c[list(cols)] @ d_b) < -tols.opt_tol * scale:
            ray = np.zeros(n)
            ray[list(cols)] = d_b
            return LPSolution(status=UNBOUNDED, ray=ray)

    chosen = None
    y = np.zeros(m)
    for cols, x_b in ties:
        sub = a_r[:, cols]
        try:
            y_sel = np.linalg.solve(sub.T, c[list(cols)])
        except np.linalg.LinAlgError:
            continue
        if np.min(c - a_r.T @ y_sel) >= -tols.opt_tol:
            chosen = (cols, x_b)
            y[sel] = y_sel
            break
    if chosen is None:
        cols, x_b = ties[0]
        try:
            y[sel] = np.linalg.solve(a_r[:, cols].T, c[list(cols)])
        except np.linalg.LinAlgError:
            y[sel] = np.linalg.lstsq(a_r[:, cols].T, c[list(cols)], rcond=None)[0]
        chosen = (cols, x_b)
    cols, x_b = chosen
    x = np.zeros(n)
    x[list(cols)] = x_b
    return LPSolution(
        status=OPTIMAL,
        x=x,
        y=y,
        objective_value=float(c @ x),
        basis=tuple(cols),
    )
