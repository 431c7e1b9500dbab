"""Estimator-style wrappers: parameter handling and fitted attributes."""

import numpy as np
import pytest
from sklearn.base import clone

import acmdp
from acmdp.estimators import (
    AverageCostSolver,
    ConstrainedSolver,
    LexicographicSolver,
    ValueIterationSolver,
)


def two_state():
    return acmdp.from_entries(
        n_states=2,
        actions=[[0, 1], [0, 1]],
        transitions=[(0, 0, 1, 1.0), (0, 1, 0, 1.0), (1, 0, 0, 1.0), (1, 1, 1, 1.0)],
        costs=[[(0, 0, 1.0), (0, 1, 3.0), (1, 0, 2.0), (1, 1, 0.5)]],
    )


def mixing():
    return acmdp.from_entries(
        n_states=1,
        actions=[[0, 1]],
        transitions=[(0, 0, 0, 1.0), (0, 1, 0, 1.0)],
        costs=[
            [(0, 0, 0.0), (0, 1, 1.0)],
            [(0, 0, 2.0), (0, 1, 0.0)],
        ],
        budgets=[1.0],
    )


@pytest.mark.parametrize(
    "cls",
    [AverageCostSolver, ConstrainedSolver, LexicographicSolver, ValueIterationSolver],
)
def test_params_round_trip_and_clone(cls):
    est = cls()
    params = est.get_params()
    est.set_params(**params)
    assert est.get_params() == params
    duplicate = clone(est)
    assert duplicate.get_params() == params


def test_clone_preserves_overrides():
    est = AverageCostSolver(opt_tol=1e-10, support_eps=1e-8)
    duplicate = clone(est)
    assert duplicate.get_params()["opt_tol"] == 1e-10
    assert duplicate.get_params()["support_eps"] == 1e-8


def test_average_cost_solver_fit():
    m = two_state()
    est = AverageCostSolver()
    assert est.fit(m) is est
    assert est.value_ == pytest.approx(0.5, abs=1e-12)
    assert est.n_states_ == 2
    assert est.greedy_.action == (0, 1)
    assert est.acoe_.inequality_ok
    np.testing.assert_array_equal(est.predict([0, 1]), [0, 1])


def test_predict_before_fit_raises():
    with pytest.raises(AttributeError):
        AverageCostSolver().predict([0])


def test_constrained_solver_uses_explicit_kappa():
    est = ConstrainedSolver(kappa=[1.0]).fit(mixing())
    assert est.status_ == acmdp.OPTIMAL
    assert est.value_ == pytest.approx(0.5, abs=1e-12)
    assert est.beta_[0] == pytest.approx(-0.5, abs=1e-12)
    assert est.kappa_ == (1.0,)


def test_constrained_solver_falls_back_to_model_budgets():
    est = ConstrainedSolver().fit(mixing())
    assert est.kappa_ == (1.0,)
    assert est.value_ == pytest.approx(0.5, abs=1e-12)


def test_constrained_solver_requires_some_kappa():
    m = acmdp.from_entries(
        n_states=1,
        actions=[[0, 1]],
        transitions=[(0, 0, 0, 1.0), (0, 1, 0, 1.0)],
        costs=[
            [(0, 0, 0.0), (0, 1, 1.0)],
            [(0, 0, 2.0), (0, 1, 0.0)],
        ],
    )
    with pytest.raises(ValueError):
        ConstrainedSolver().fit(m)


def test_constrained_solver_infeasible_status():
    m = acmdp.from_entries(
        n_states=1,
        actions=[[0]],
        transitions=[(0, 0, 0, 1.0)],
        costs=[[(0, 0, 1.0)], [(0, 0, 2.0)]],
    )
    est = ConstrainedSolver(kappa=[1.0]).fit(m)
    assert est.status_ == acmdp.INFEASIBLE
    assert not hasattr(est, "value_")


def test_lex_solver():
    est = LexicographicSolver(kappa=[2.0]).fit(mixing())
    assert est.status_ == acmdp.OPTIMAL
    assert abs(est.kappa_star_[0] - 0.0) <= 1e-7
    assert abs(est.kappa_star_[1] - 2.0) <= 1e-7
    assert est.mode_actions_ == (0,)


def test_value_iteration_solver_matches_lp():
    m = two_state()
    vi = ValueIterationSolver().fit(m)
    lp = AverageCostSolver().fit(m)
    assert vi.rho_ == pytest.approx(lp.value_, abs=1e-5)
    np.testing.assert_array_equal(vi.predict([0, 1]), lp.predict([0, 1]))


def test_refit_overwrites_state():
    est = AverageCostSolver()
    est.fit(two_state())
    first = est.value_
    cheap = acmdp.from_entries(
        n_states=1,
        actions=[[0]],
        transitions=[(0, 0, 0, 1.0)],
        costs=[[(0, 0, 0.25)]],
    )
    est.fit(cheap)
    assert est.value_ == pytest.approx(0.25, abs=1e-12)
    assert est.value_ != first
    assert est.n_states_ == 1
