"""Budget-constrained occupation-measure LP and the lexicographic recursion.

The constrained program adds a slack variable per budget: <gamma, c_i> +
alpha_i = kappa_i with alpha >= 0.  The budget-row duals beta come out
nonpositive (the slack columns force it), and the no-gap identity reads
value = rho + sum_i beta_i kappa_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleStageError, InternalInconsistencyError
from .lp import (
    DEFAULT_TOLS,
    INFEASIBLE,
    OPTIMAL,
    LPSolution,
    StandardLP,
    Tolerances,
    polish_dual,
    solve_simplex,
)
from .model import FiniteMDP, require_valid
from .occupation import (
    SUPPORT_EPS,
    DualCertificate,
    OccupationMeasure,
    StationaryPair,
    build_primal,
    decompose,
    state_marginal,
)

LEX_EPS = 1e-8


@dataclass(frozen=True, eq=False)
class ConstrainedDual:
    """Certificate (rho, h, beta) with beta <= 0 pricing the budgets."""

    rho: float
    h: np.ndarray
    beta: np.ndarray
    anchor: int = 0

    def __post_init__(self):
        for name in ("h", "beta"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def adjusted_cost(self, mdp: FiniteMDP) -> np.ndarray:
        """c*(x,a) = c_0(x,a) - sum_i beta_i c_i(x,a) (nonnegative since beta <= 0)."""
        return mdp.costs[0] - self.beta @ mdp.costs[1:]


@dataclass(frozen=True, eq=False)
class ConstrainedSolution:
    """Outcome of a constrained solve; fields beyond status are set when optimal."""

    status: str
    gamma: OccupationMeasure | None = None
    alpha: np.ndarray | None = None
    value: float | None = None
    pair: StationaryPair | None = None
    cert: ConstrainedDual | None = None
    lp: LPSolution | None = None

    @property
    def binding_constraints(self) -> tuple[int, ...]:
        """Budget indices whose slack is (numerically) zero."""
        if self.alpha is None:
            return ()
        return tuple(int(i) for i in np.nonzero(self.alpha <= 1e-9)[0])


@dataclass(frozen=True, eq=False)
class LexSolution:
    """Stagewise optimal values kappa_star = (value, then each constraint cost
    minimized in order) and the final stage's measure and pair."""

    status: str
    kappa_star: np.ndarray | None = None
    gamma: OccupationMeasure | None = None
    pair: StationaryPair | None = None


def _check_kappa(mdp: FiniteMDP, kappa) -> np.ndarray:
    require_valid(mdp)
    d = mdp.n_constraints
    if d < 1:
        raise ValueError("model has no constraint costs; use the unconstrained builder")
    kappa = np.asarray(kappa, dtype=float).reshape(-1)
    if kappa.shape != (d,):
        raise ValueError(f"kappa has length {kappa.shape[0]}, expected {d}")
    if not np.all(np.isfinite(kappa)) or np.any(kappa < 0):
        raise ValueError("kappa must be finite and nonnegative")
    return kappa


def build_constrained(mdp: FiniteMDP, kappa) -> StandardLP:
    """Assemble the constrained LP over variables (gamma, alpha).

    Rows: normalization, one balance row per state, then one budget row
    <gamma, c_i> + alpha_i = kappa_i per constraint.
    """
    kappa = _check_kappa(mdp, kappa)
    base = build_primal(mdp)
    d = mdp.n_constraints
    n_pairs = mdp.n_pairs
    m0 = base.matrix.shape[0]
    a = np.zeros((m0 + d, n_pairs + d))
    a[:m0, :n_pairs] = base.matrix
    a[m0:, :n_pairs] = mdp.costs[1:]
    a[m0:, n_pairs:] = np.eye(d)
    b = np.concatenate([base.rhs, kappa])
    c = np.concatenate([mdp.costs[0], np.zeros(d)])
    return StandardLP(objective=c, matrix=a, rhs=b)


def solve_constrained(
    mdp: FiniteMDP,
    kappa,
    tols: Tolerances = DEFAULT_TOLS,
    support_eps: float = SUPPORT_EPS,
    polish: bool = True,
) -> ConstrainedSolution:
    """Solve the budget-constrained problem.

    An empty feasible set is a first-class outcome (status "infeasible"), not
    an error.  When optimal, the policy is completed off-support with the
    greedy action for the adjusted cost c* = c_0 - sum_i beta_i c_i, matching
    the constrained optimality equation's argmin.

    ``polish=False`` skips the dual refinement step; see the unconstrained
    solver for when that is appropriate.
    """
    kappa = _check_kappa(mdp, kappa)
    lp = build_constrained(mdp, kappa)
    sol = solve_simplex(lp, tols)
    if sol.status == INFEASIBLE:
        return ConstrainedSolution(status=INFEASIBLE)
    if sol.status != OPTIMAL:
        raise InternalInconsistencyError(
            f"constrained LP came back {sol.status}; it is bounded whenever feasible"
        )
    if polish:
        sol = polish_dual(lp, sol, tols)
    n_pairs, d = mdp.n_pairs, mdp.n_constraints
    g = sol.x[:n_pairs]
    alpha = sol.x[n_pairs:] + 0.0  # adding zero turns -0.0 slacks into 0.0
    p = state_marginal(mdp, g)
    on_support = np.nonzero(p > support_eps)[0]
    anchor = int(on_support[0]) if on_support.size else 0
    h_raw = sol.y[1 : 1 + mdp.n_states]
    beta = sol.y[1 + mdp.n_states :]
    cert = ConstrainedDual(
        rho=float(sol.y[0]), h=h_raw - h_raw[anchor], beta=beta, anchor=anchor
    )
    gamma = OccupationMeasure(g)
    dual_cert = DualCertificate(rho=cert.rho, h=cert.h, anchor=anchor)
    pair = decompose(
        gamma, mdp, dual_cert, cost=cert.adjusted_cost(mdp), support_eps=support_eps
    )
    return ConstrainedSolution(
        status=OPTIMAL,
        gamma=gamma,
        alpha=alpha,
        value=float(sol.objective_value),
        pair=pair,
        cert=cert,
        lp=sol,
    )


def complementarity_check(sol: ConstrainedSolution) -> float:
    """|sum_i alpha_i beta_i|; complementary slackness makes it vanish."""
    if sol.status != OPTIMAL:
        raise ValueError("complementarity is defined only for optimal solutions")
    return abs(float(sol.alpha @ sol.cert.beta))


def duality_gap_identity(sol: ConstrainedSolution, kappa) -> float:
    """|value - (rho + sum_i beta_i kappa_i)|; zero in exact arithmetic."""
    kappa = np.asarray(kappa, dtype=float).reshape(-1)
    return abs(sol.value - (sol.cert.rho + float(sol.cert.beta @ kappa)))


def _stage_lp(
    mdp: FiniteMDP,
    kappa: np.ndarray,
    objective_cost: np.ndarray,
    pins: list[tuple[np.ndarray, float]],
    lex_eps: float,
) -> StandardLP:
    """Constrained LP plus two-sided pins |<gamma, w> - target| <= lex_eps.

    Each pin adds two rows and two slack variables: <gamma, w> + s_hi =
    target + lex_eps and <gamma, w> - s_lo = target - lex_eps.
    """
    base = build_constrained(mdp, kappa)
    m0, n0 = base.matrix.shape
    n_pins = len(pins)
    a = np.zeros((m0 + 2 * n_pins, n0 + 2 * n_pins))
    a[:m0, :n0] = base.matrix
    b = np.zeros(m0 + 2 * n_pins)
    b[:m0] = base.rhs
    for j, (w, target) in enumerate(pins):
        hi, lo = m0 + 2 * j, m0 + 2 * j + 1
        a[hi, : mdp.n_pairs] = w
        a[hi, n0 + 2 * j] = 1.0
        b[hi] = target + lex_eps
        a[lo, : mdp.n_pairs] = w
        a[lo, n0 + 2 * j + 1] = -1.0
        b[lo] = target - lex_eps
    c = np.zeros(n0 + 2 * n_pins)
    c[: mdp.n_pairs] = objective_cost
    return StandardLP(objective=c, matrix=a, rhs=b)


def lex_solve(
    mdp: FiniteMDP,
    kappa,
    tols: Tolerances = DEFAULT_TOLS,
    lex_eps: float = LEX_EPS,
    support_eps: float = SUPPORT_EPS,
) -> LexSolution:
    """Minimize (J_0, J_1, ..., J_d) lexicographically over the feasible set.

    Stage 0 is the constrained solve; stage i re-solves with objective
    <gamma, c_i>, pinning every earlier stage's value to within lex_eps.  A
    stage made infeasible by pin rounding is retried once with lex_eps * 10.
    """
    kappa = _check_kappa(mdp, kappa)
    first = solve_constrained(mdp, kappa, tols, support_eps)
    if first.status != OPTIMAL:
        return LexSolution(status=first.status)
    d = mdp.n_constraints
    kappa_star = [first.value]
    g = first.gamma.gamma
    final_sol = None
    for i in range(1, d + 1):
        pins = [(mdp.costs[l], kappa_star[l]) for l in range(i)]
        sol = None
        eps = lex_eps
        for _ in range(2):
            lp = _stage_lp(mdp, kappa, mdp.costs[i], pins, eps)
            cand = solve_simplex(lp, tols)
            if cand.status == OPTIMAL:
                sol = cand
                break
            eps *= 10.0
        if sol is None:
            raise InfeasibleStageError(
                f"lexicographic stage {i} infeasible even with pin tolerance {eps / 10.0}"
            )
        g = sol.x[: mdp.n_pairs]
        kappa_star.append(float(mdp.costs[i] @ g))
        final_sol = sol
    gamma = OccupationMeasure(g)
    p = state_marginal(mdp, g)
    on_support = np.nonzero(p > support_eps)[0]
    anchor = int(on_support[0]) if on_support.size else 0
    h_raw = final_sol.y[1 : 1 + mdp.n_states]
    cert = DualCertificate(
        rho=float(final_sol.y[0]), h=h_raw - h_raw[anchor], anchor=anchor
    )
    pair = decompose(gamma, mdp, cert, support_eps=support_eps)
    return LexSolution(
        status=OPTIMAL,
        kappa_star=np.array(kappa_star),
        gamma=gamma,
        pair=pair,
    )
