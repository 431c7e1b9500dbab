"""Occupation-measure linear program for the unconstrained average-cost problem.

The primal variable is a probability weight per admissible state-action pair;
the constraints are one normalization row and one balance row per state.  The
dual of the normalization row is the optimal average cost and the balance-row
duals give the relative value function, so one solve yields the optimal
measure, a stationary policy-distribution pair, and a dual certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InternalInconsistencyError
from .lp import (
    DEFAULT_TOLS,
    OPTIMAL,
    LPSolution,
    StandardLP,
    Tolerances,
    polish_dual,
    solve_simplex,
)
from .model import FiniteMDP, require_valid

SUPPORT_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class OccupationMeasure:
    """Nonnegative weights over admissible pairs, summing to one and balanced."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float).reshape(-1)
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)


@dataclass(frozen=True, eq=False)
class StationaryPair:
    """Stationary randomized policy together with an invariant distribution.

    policy holds mu(a|x) per admissible pair (each state's slice sums to one);
    dist is a probability vector over states.
    """

    policy: np.ndarray
    dist: np.ndarray
    support_eps: float = SUPPORT_EPS

    def __post_init__(self):
        for name in ("policy", "dist"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @cached_property
    def support(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.nonzero(self.dist > self.support_eps)[0])


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Average-cost value rho and relative value function h, h(anchor) = 0."""

    rho: float
    h: np.ndarray
    anchor: int = 0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float).reshape(-1)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)


@dataclass(frozen=True, eq=False)
class UnconstrainedSolution:
    gamma: OccupationMeasure
    value: float
    pair: StationaryPair
    cert: DualCertificate
    lp: LPSolution


def build_primal(mdp: FiniteMDP) -> StandardLP:
    """Assemble the occupation-measure LP.

    Row 0 normalizes the weights to one; row 1+y balances the flow through
    state y.  The balance rows sum to zero, so one is redundant; it is kept
    and left to the solver's phase-1 handling.
    """
    require_valid(mdp)
    n, k = mdp.n_states, mdp.n_pairs
    a = np.zeros((1 + n, k))
    a[0] = 1.0
    for row, (x, _) in enumerate(mdp.pairs):
        a[1 + x, row] += 1.0
    a[1:] -= mdp.kernel.T
    b = np.zeros(1 + n)
    b[0] = 1.0
    return StandardLP(objective=mdp.costs[0].copy(), matrix=a, rhs=b)


def state_marginal(mdp: FiniteMDP, gamma: np.ndarray) -> np.ndarray:
    """p(x) = sum_a gamma(x, a)."""
    p = np.zeros(mdp.n_states)
    np.add.at(p, mdp.pair_states, gamma)
    return p


def normalization_residual(gamma: np.ndarray) -> float:
    return abs(float(np.sum(gamma)) - 1.0)


def balance_residual(mdp: FiniteMDP, gamma: np.ndarray) -> float:
    """max_y |sum_a gamma(y,a) - sum_{(x,a)} q(y|x,a) gamma(x,a)|."""
    out = state_marginal(mdp, gamma) - mdp.kernel.T @ gamma
    return float(np.max(np.abs(out)))


def dual_feasibility_slacks(
    mdp: FiniteMDP, rho: float, h: np.ndarray, cost: np.ndarray | None = None
) -> np.ndarray:
    """Per-pair slack cost(x,a) + sum_y h(y) q(y|x,a) - h(x) - rho.

    Nonnegative slack everywhere is dual feasibility; the minimum over a
    state's actions is the pointwise optimality-inequality slack.
    """
    if cost is None:
        cost = mdp.costs[0]
    return cost + mdp.kernel @ h - h[mdp.pair_states] - rho


def greedy_actions(
    mdp: FiniteMDP, h: np.ndarray, cost: np.ndarray | None = None
) -> tuple[int, ...]:
    """Per-state argmin of cost(x,a) + sum_y h(y) q(y|x,a), lowest index on ties."""
    if cost is None:
        cost = mdp.costs[0]
    q_vals = cost + mdp.kernel @ h
    out = []
    for x in range(mdp.n_states):
        rows = mdp.state_rows(x)
        local = int(np.argmin(q_vals[rows.start : rows.stop]))
        out.append(mdp.actions[x][local])
    return tuple(out)


def decompose(
    gamma: OccupationMeasure,
    mdp: FiniteMDP,
    cert: DualCertificate,
    cost: np.ndarray | None = None,
    support_eps: float = SUPPORT_EPS,
) -> StationaryPair:
    """Split an occupation measure into (policy, distribution).

    On the support, mu(a|x) = gamma(x,a) / p(x).  Off the support, the policy
    is completed with the point mass on the greedy action for the certificate
    (argmin of cost + h-expectation, lowest index on ties), which keeps the
    completion consistent with the optimality-equation argmin.
    """
    g = gamma.gamma
    p = state_marginal(mdp, g)
    greedy = greedy_actions(mdp, cert.h, cost)
    policy = np.zeros(mdp.n_pairs)
    for x in range(mdp.n_states):
        rows = mdp.state_rows(x)
        if p[x] > support_eps:
            policy[rows.start : rows.stop] = g[rows.start : rows.stop] / p[x]
        else:
            policy[mdp.pair_index[(x, greedy[x])]] = 1.0
    return StationaryPair(policy=policy, dist=p, support_eps=support_eps)


def average_cost(pair: StationaryPair, mdp: FiniteMDP, cost_index: int) -> float:
    """Long-run average of cost_index under the pair: sum c_i(x,a) mu(a|x) p(x)."""
    if not 0 <= cost_index < mdp.costs.shape[0]:
        raise IndexError(f"cost index {cost_index} out of range")
    weights = pair.policy * pair.dist[mdp.pair_states]
    return float(mdp.costs[cost_index] @ weights)


def invariance_residual(pair: StationaryPair, mdp: FiniteMDP) -> float:
    """max_y |p(y) - sum_x sum_a q(y|x,a) mu(a|x) p(x)|."""
    weights = pair.policy * pair.dist[mdp.pair_states]
    flow = mdp.kernel.T @ weights
    return float(np.max(np.abs(pair.dist - flow)))


def pair_to_occupation(pair: StationaryPair, mdp: FiniteMDP) -> np.ndarray:
    """gamma(x,a) = mu(a|x) p(x)."""
    return pair.policy * pair.dist[mdp.pair_states]


def solve_unconstrained(
    mdp: FiniteMDP,
    tols: Tolerances = DEFAULT_TOLS,
    support_eps: float = SUPPORT_EPS,
    polish: bool = True,
) -> UnconstrainedSolution:
    """Solve the occupation-measure LP and assemble measure, pair, certificate.

    The LP on a valid model is always feasible (any stationary pair induces a
    feasible point) and bounded (costs are nonnegative), so a non-optimal
    status is an internal failure, not a user condition.

    ``polish=False`` skips the dual refinement step.  The optimal value and
    the measure are unaffected; only callers that go on to read the
    certificate (greedy extraction, support tightness) need the refined dual,
    and refinement can dominate the runtime on large degenerate instances.
    """
    lp = build_primal(mdp)
    sol = solve_simplex(lp, tols)
    if sol.status != OPTIMAL:
        raise InternalInconsistencyError(
            f"occupation LP came back {sol.status} on a valid model"
        )
    if polish:
        sol = polish_dual(lp, sol, tols)
    g = sol.x
    p = state_marginal(mdp, g)
    rho = float(sol.y[0])
    h_raw = sol.y[1:]
    on_support = np.nonzero(p > support_eps)[0]
    anchor = int(on_support[0]) if on_support.size else 0
    cert = DualCertificate(rho=rho, h=h_raw - h_raw[anchor], anchor=anchor)
    gamma = OccupationMeasure(g)
    pair = decompose(gamma, mdp, cert, support_eps=support_eps)
    return UnconstrainedSolution(
        gamma=gamma,
        value=float(sol.objective_value),
        pair=pair,
        cert=cert,
        lp=sol,
    )
