"""Average-cost optimality equation checks and greedy-policy extraction.

Given a dual certificate (rho, h), the per-state slack is

    min_a {c(x,a) + sum_y h(y) q(y|x,a)} - rho - h(x).

Dual feasibility makes it nonnegative everywhere; at the optimum it vanishes
on the support of the stationary distribution.  The constrained variant runs
the same check with the multiplier-adjusted cost c* = c_0 - sum_i beta_i c_i
and the level rho~ = value - sum_i beta_i kappa_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constrained import ConstrainedDual
from .errors import EmptyAbsorbingSetError
from .model import FiniteMDP
from .occupation import DualCertificate, StationaryPair, greedy_actions

EQ_TOL = 1e-7
CLOSURE_TOL = 1e-10


@dataclass(frozen=True)
class StateSlack:
    state: int
    slack: float
    argmin_action: int


@dataclass(frozen=True, eq=False)
class AcoeReport:
    """Pointwise optimality-inequality slacks for one certificate.

    inequality_ok: slack >= -1e-8 at every state.
    equality_states: states with |slack| <= eq_tol.
    support_covered: every state carrying stationary mass is an equality state.
    randomized_max_dev: on-support deviation of the policy-averaged form
    |sum_a mu(a|x)(c + h-expectation) - rho - h(x)|.
    """

    inequality_ok: bool
    min_slack: float
    equality_states: tuple[int, ...]
    support_covered: bool
    per_state: tuple[StateSlack, ...]
    randomized_max_dev: float
    eq_tol: float = EQ_TOL


@dataclass(frozen=True, eq=False)
class GreedyPolicy:
    """Deterministic argmin policy and the absorbing part of its equality set.

    For every x in absorbing_set, the greedy action keeps the chain inside
    absorbing_set with probability one (up to 1e-10).
    """

    action: tuple[int, ...]
    absorbing_set: tuple[int, ...]


def _slack_table(mdp, rho, h, cost):
    q_vals = cost + mdp.kernel @ h
    rows = []
    mins = np.empty(mdp.n_states)
    for x in range(mdp.n_states):
        r = mdp.state_rows(x)
        local = q_vals[r.start : r.stop]
        j = int(np.argmin(local))
        mins[x] = local[j]
        rows.append(
            StateSlack(
                state=x,
                slack=float(local[j] - rho - h[x]),
                argmin_action=mdp.actions[x][j],
            )
        )
    return rows, q_vals


def _build_report(mdp, rho, h, cost, pair, eq_tol, ineq_tol=1e-8):
    per_state, q_vals = _slack_table(mdp, rho, h, cost)
    slacks = np.array([row.slack for row in per_state])
    equality = tuple(int(x) for x in np.nonzero(np.abs(slacks) <= eq_tol)[0])
    support = pair.support
    max_dev = 0.0
    for x in support:
        r = mdp.state_rows(x)
        avg = float(pair.policy[r.start : r.stop] @ q_vals[r.start : r.stop])
        max_dev = max(max_dev, abs(avg - rho - h[x]))
    return AcoeReport(
        inequality_ok=bool(np.min(slacks) >= -ineq_tol),
        min_slack=float(np.min(slacks)),
        equality_states=equality,
        support_covered=all(x in equality for x in support),
        per_state=tuple(per_state),
        randomized_max_dev=max_dev,
        eq_tol=eq_tol,
    )


def acoe_residuals(
    mdp: FiniteMDP,
    cert: DualCertificate,
    pair: StationaryPair,
    cost: np.ndarray | None = None,
    eq_tol: float = EQ_TOL,
) -> AcoeReport:
    """Check the optimality equation for an unconstrained certificate.

    Alongside the argmin form, the policy-averaged form is evaluated on the
    support; a randomized optimal policy must average the bracketed term to
    rho + h(x) exactly where it carries mass.
    """
    if cost is None:
        cost = mdp.costs[0]
    return _build_report(mdp, cert.rho, cert.h, cost, pair, eq_tol)


def constrained_acoe_residuals(
    mdp: FiniteMDP,
    cdual: ConstrainedDual,
    pair: StationaryPair,
    kappa,
    value: float,
    eq_tol: float = EQ_TOL,
) -> AcoeReport:
    """Check the optimality equation for a constrained certificate.

    Uses the adjusted cost c* = c_0 - sum_i beta_i c_i and the adjusted level
    rho~ = value - sum_i beta_i kappa_i (equal to cdual.rho up to the duality
    gap).
    """
    kappa = np.asarray(kappa, dtype=float).reshape(-1)
    cost = cdual.adjusted_cost(mdp)
    rho_adj = float(value - cdual.beta @ kappa)
    return _build_report(mdp, rho_adj, cdual.h, cost, pair, eq_tol)


def extract_greedy_policy(
    mdp: FiniteMDP,
    cert: DualCertificate,
    pair: StationaryPair,
    cost: np.ndarray | None = None,
    eq_tol: float = EQ_TOL,
) -> GreedyPolicy:
    """Take the pointwise argmin policy and its absorbing equality states.

    The absorbing set is the largest subset of the equality states that the
    greedy policy cannot leave: states leaking probability outside the
    current set are pruned until a fixed point.  On it, the greedy policy is
    average-cost optimal.
    """
    if cost is None:
        cost = mdp.costs[0]
    action = greedy_actions(mdp, cert.h, cost)
    per_state, _ = _slack_table(mdp, cert.rho, cert.h, cost)
    current = {row.state for row in per_state if abs(row.slack) <= eq_tol}
    while True:
        removed = False
        for x in sorted(current):
            row = mdp.kernel[mdp.pair_index[(x, action[x])]]
            inside = sum(float(row[y]) for y in current)
            if inside < 1.0 - CLOSURE_TOL:
                current.discard(x)
                removed = True
        if not removed:
            break
    if not current:
        raise EmptyAbsorbingSetError(
            "no nonempty closed subset of the equality states at tolerance"
        )
    return GreedyPolicy(action=action, absorbing_set=tuple(sorted(current)))
