"""Occupation-measure program: builder, solver, measure handling."""

import numpy as np
import pytest

import acmdp

import gen


def two_state():
    return acmdp.from_entries(
        n_states=2,
        actions=[[0, 1], [0, 1]],
        transitions=[(0, 0, 1, 1.0), (0, 1, 0, 1.0), (1, 0, 0, 1.0), (1, 1, 1, 1.0)],
        costs=[[(0, 0, 1.0), (0, 1, 3.0), (1, 0, 2.0), (1, 1, 0.5)]],
    )


def cycle():
    return acmdp.from_entries(
        n_states=2,
        actions=[[0], [0]],
        transitions=[(0, 0, 1, 1.0), (1, 0, 0, 1.0)],
        costs=[[(0, 0, 1.0), (1, 0, 3.0)]],
    )


def test_primal_shape():
    m = two_state()
    lp = acmdp.build_primal(m)
    assert lp.matrix.shape == (3, 4)
    np.testing.assert_array_equal(lp.matrix[0], np.ones(4))
    np.testing.assert_array_equal(lp.rhs, [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(lp.objective, m.costs[0])


def test_balance_rows_encode_flow():
    # a feasible stationary point of the deterministic cycle satisfies
    # every row: uniform mass on the two pairs
    m = cycle()
    lp = acmdp.build_primal(m)
    g = np.array([0.5, 0.5])
    np.testing.assert_allclose(lp.matrix @ g, lp.rhs, atol=1e-15)


def test_cycle_solution():
    m = cycle()
    res = acmdp.solve_unconstrained(m)
    assert res.value == pytest.approx(2.0, abs=1e-12)
    np.testing.assert_allclose(res.gamma.gamma, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(acmdp.state_marginal(m, res.gamma.gamma), [0.5, 0.5])


def test_two_state_solution():
    m = two_state()
    res = acmdp.solve_unconstrained(m)
    assert res.value == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(res.gamma.gamma, [0.0, 0.0, 0.0, 1.0], atol=1e-12)
    assert res.cert.rho == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(
        acmdp.state_marginal(m, res.gamma.gamma), [0.0, 1.0], atol=1e-12
    )


def test_residual_functions_flag_corruption():
    m = cycle()
    res = acmdp.solve_unconstrained(m)
    g = res.gamma.gamma
    assert acmdp.normalization_residual(g) <= 1e-12
    assert acmdp.balance_residual(m, g) <= 1e-12
    assert acmdp.invariance_residual(res.pair, m) <= 1e-12
    bad = g.copy()
    bad[0] += 0.25
    assert acmdp.normalization_residual(bad) > 0.2
    assert acmdp.balance_residual(m, bad) > 0.1


def test_decompose_then_lift_recovers_measure():
    rng = np.random.default_rng(21)
    for _ in range(25):
        m = gen.random_unichain_mdp(rng)
        res = acmdp.solve_unconstrained(m)
        pair = acmdp.decompose(res.gamma, m, res.cert)
        lifted = acmdp.pair_to_occupation(pair, m)
        np.testing.assert_allclose(lifted, res.gamma.gamma, atol=1e-9)


def test_pair_policy_rows_are_conditional_distributions():
    rng = np.random.default_rng(22)
    for _ in range(15):
        m = gen.random_mdp(rng)
        res = acmdp.solve_unconstrained(m)
        pol = res.pair.policy
        k = 0
        for x in range(m.n_states):
            row = pol[k : k + len(m.actions[x])]
            k += len(m.actions[x])
            assert row.min() >= -1e-12
            assert row.sum() == pytest.approx(1.0, abs=1e-9)


def test_average_cost_matches_measure():
    m = two_state()
    res = acmdp.solve_unconstrained(m)
    assert acmdp.average_cost(res.pair, m, 0) == pytest.approx(res.value, abs=1e-10)


def test_polish_flag_changes_only_the_dual():
    rng = np.random.default_rng(23)
    for _ in range(10):
        m = gen.random_mdp(rng)
        a = acmdp.solve_unconstrained(m)
        b = acmdp.solve_unconstrained(m, polish=False)
        assert a.value == pytest.approx(b.value, abs=1e-12)
        np.testing.assert_array_equal(a.gamma.gamma, b.gamma.gamma)


def test_queue_value_frozen():
    m = acmdp.build_queue_truncation(acmdp.QueueFamilySpec(0.3, 0.6, 1.0, 5.0, 10))
    res = acmdp.solve_unconstrained(m)
    # cross-checked against policy enumeration (0.3996188434280266) and
    # relative value iteration (0.3996188434736928)
    assert res.value == pytest.approx(0.39961884342803866, abs=1e-9)


def test_multichain_instance_picks_cheapest_class():
    # two isolated self-loop states; the program must put all mass on the
    # cheaper loop even though no policy chain is unichain
    m = acmdp.from_entries(
        n_states=2,
        actions=[[0], [0]],
        transitions=[(0, 0, 0, 1.0), (1, 0, 1, 1.0)],
        costs=[[(0, 0, 3.0), (1, 0, 1.0)]],
    )
    res = acmdp.solve_unconstrained(m)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(res.gamma.gamma, [0.0, 1.0], atol=1e-12)
