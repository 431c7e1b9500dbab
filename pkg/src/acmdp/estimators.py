"""Estimator-style front end: fit a model, predict per-state actions.

Thin wrappers over the functional solvers following the scikit-learn
conventions: constructor arguments are stored verbatim, fitted state lives in
trailing-underscore attributes, fit returns self, and get_params/set_params
come from BaseEstimator, so the estimators clone and grid-search cleanly.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .acoe import acoe_residuals, constrained_acoe_residuals, extract_greedy_policy
from .constrained import lex_solve, solve_constrained
from .lp import INFEASIBLE, OPTIMAL, Tolerances
from .model import FiniteMDP
from .occupation import SUPPORT_EPS, greedy_actions, solve_unconstrained
from .oracles import relative_value_iteration


def _check_mdp(x) -> FiniteMDP:
    if not isinstance(x, FiniteMDP):
        raise TypeError(f"expected a FiniteMDP, got {type(x).__name__}")
    return x


def _check_states(est, states) -> np.ndarray:
    arr = np.asarray(states)
    if arr.ndim != 1:
        raise ValueError("states must be a one-dimensional array of state indices")
    if arr.size and (arr.min() < 0 or arr.max() >= est.n_states_):
        raise ValueError("state index out of range")
    return arr.astype(int)


class AverageCostSolver(BaseEstimator):
    """Minimize the long-run average running cost of a finite MDP.

    fit(mdp) solves the occupation-measure program; predict(states) returns
    the greedy action of the fitted certificate per queried state.
    """

    def __init__(
        self,
        feas_tol: float = 1e-9,
        opt_tol: float = 1e-9,
        gap_tol: float = 1e-8,
        support_eps: float = SUPPORT_EPS,
    ):
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.gap_tol = gap_tol
        self.support_eps = support_eps

    def _tols(self) -> Tolerances:
        return Tolerances(
            feas_tol=self.feas_tol, opt_tol=self.opt_tol, gap_tol=self.gap_tol
        )

    def fit(self, X, y=None):
        mdp = _check_mdp(X)
        res = solve_unconstrained(mdp, self._tols(), self.support_eps)
        self.n_states_ = mdp.n_states
        self.value_ = res.value
        self.gamma_ = res.gamma.gamma
        self.pair_ = res.pair
        self.cert_ = res.cert
        self.acoe_ = acoe_residuals(mdp, res.cert, res.pair)
        self.greedy_ = extract_greedy_policy(mdp, res.cert, res.pair)
        return self

    def predict(self, X):
        states = _check_states(self, X)
        actions = np.asarray(self.greedy_.action)
        return actions[states]


class ConstrainedSolver(BaseEstimator):
    """Minimize the running cost subject to budget limits on the other costs.

    kappa defaults to the model's own budgets.  After fit, status_ is
    "optimal" or "infeasible"; predict returns the deterministic argmin of
    the multiplier-adjusted cost, which is the certificate's greedy
    representative (the true optimum may randomize; see pair_).
    """

    def __init__(
        self,
        kappa=None,
        feas_tol: float = 1e-9,
        opt_tol: float = 1e-9,
        gap_tol: float = 1e-8,
        support_eps: float = SUPPORT_EPS,
    ):
        self.kappa = kappa
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.gap_tol = gap_tol
        self.support_eps = support_eps

    def fit(self, X, y=None):
        mdp = _check_mdp(X)
        kappa = self.kappa if self.kappa is not None else mdp.budgets
        if kappa is None:
            raise ValueError("kappa not given and the model carries no budgets")
        tols = Tolerances(
            feas_tol=self.feas_tol, opt_tol=self.opt_tol, gap_tol=self.gap_tol
        )
        sol = solve_constrained(mdp, kappa, tols, self.support_eps)
        self.n_states_ = mdp.n_states
        self.kappa_ = np.asarray(kappa, dtype=float).reshape(-1)
        self.status_ = sol.status
        if sol.status == OPTIMAL:
            self.value_ = sol.value
            self.gamma_ = sol.gamma.gamma
            self.alpha_ = sol.alpha
            self.beta_ = sol.cert.beta
            self.pair_ = sol.pair
            self.cert_ = sol.cert
            self.acoe_ = constrained_acoe_residuals(
                mdp, sol.cert, sol.pair, self.kappa_, sol.value
            )
            self.greedy_actions_ = greedy_actions(
                mdp, sol.cert.h, sol.cert.adjusted_cost(mdp)
            )
        return self

    def predict(self, X):
        if self.status_ == INFEASIBLE:
            raise ValueError("cannot predict from an infeasible fit")
        states = _check_states(self, X)
        actions = np.asarray(self.greedy_actions_)
        return actions[states]


class LexicographicSolver(BaseEstimator):
    """Minimize (running cost, then each constraint cost in order) over the
    budget-feasible set."""

    def __init__(
        self,
        kappa=None,
        lex_eps: float = 1e-8,
        feas_tol: float = 1e-9,
        opt_tol: float = 1e-9,
        gap_tol: float = 1e-8,
        support_eps: float = SUPPORT_EPS,
    ):
        self.kappa = kappa
        self.lex_eps = lex_eps
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.gap_tol = gap_tol
        self.support_eps = support_eps

    def fit(self, X, y=None):
        mdp = _check_mdp(X)
        kappa = self.kappa if self.kappa is not None else mdp.budgets
        if kappa is None:
            raise ValueError("kappa not given and the model carries no budgets")
        tols = Tolerances(
            feas_tol=self.feas_tol, opt_tol=self.opt_tol, gap_tol=self.gap_tol
        )
        lex = lex_solve(mdp, kappa, tols, self.lex_eps, self.support_eps)
        self.n_states_ = mdp.n_states
        self.kappa_ = np.asarray(kappa, dtype=float).reshape(-1)
        self.status_ = lex.status
        if lex.status == OPTIMAL:
            self.kappa_star_ = lex.kappa_star
            self.gamma_ = lex.gamma.gamma
            self.pair_ = lex.pair
            modes = []
            for x in range(mdp.n_states):
                r = mdp.state_rows(x)
                local = lex.pair.policy[r.start : r.stop]
                modes.append(mdp.actions[x][int(np.argmax(local))])
            self.mode_actions_ = tuple(modes)
        return self

    def predict(self, X):
        """Most probable action of the fitted pair per state (lowest index on
        ties); the lexicographic optimum itself may randomize, see pair_."""
        if self.status_ == INFEASIBLE:
            raise ValueError("cannot predict from an infeasible fit")
        states = _check_states(self, X)
        actions = np.asarray(self.mode_actions_)
        return actions[states]


class ValueIterationSolver(BaseEstimator):
    """Relative value iteration on a damped kernel; unichain instances only."""

    def __init__(
        self,
        max_iters: int = 100000,
        span_tol: float = 1e-10,
        damping: float = 0.5,
        anchor: int = 0,
    ):
        self.max_iters = max_iters
        self.span_tol = span_tol
        self.damping = damping
        self.anchor = anchor

    def fit(self, X, y=None):
        mdp = _check_mdp(X)
        res = relative_value_iteration(
            mdp,
            max_iters=self.max_iters,
            span_tol=self.span_tol,
            damping=self.damping,
            anchor=self.anchor,
        )
        self.n_states_ = mdp.n_states
        self.rho_ = res.rho
        self.h_ = res.h
        self.iterations_ = res.iterations
        self.greedy_ = greedy_actions(mdp, res.h)
        return self

    def predict(self, X):
        states = _check_states(self, X)
        actions = np.asarray(self.greedy_)
        return actions[states]
