"""Model construction, validation, and instance document round trips."""

import numpy as np
import pytest

import acmdp
from acmdp.errors import InstanceParseError, InstanceSemanticError, InvalidModelError

import gen


def two_state():
    return acmdp.from_entries(
        n_states=2,
        actions=[[0, 1], [0, 1]],
        transitions=[(0, 0, 1, 1.0), (0, 1, 0, 1.0), (1, 0, 0, 1.0), (1, 1, 1, 1.0)],
        costs=[[(0, 0, 1.0), (0, 1, 3.0), (1, 0, 2.0), (1, 1, 0.5)]],
    )


def test_from_entries_shapes():
    m = two_state()
    assert m.n_states == 2
    assert m.n_pairs == 4
    assert m.n_constraints == 0
    assert m.pairs == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert m.kernel.shape == (4, 2)
    assert m.costs.shape == (1, 4)
    np.testing.assert_allclose(m.kernel.sum(axis=1), 1.0)


def test_from_entries_accepts_mapping_records():
    m = acmdp.from_entries(
        n_states=1,
        actions=[[0]],
        transitions=[{"x": 0, "a": 0, "y": 0, "p": 1.0}],
        costs=[[{"x": 0, "a": 0, "value": 2.0}]],
    )
    assert m.costs[0, 0] == 2.0


def test_pair_index_is_lexicographic():
    m = two_state()
    assert m.pair_index[(0, 0)] == 0
    assert m.pair_index[(1, 1)] == 3


def test_duplicate_transition_rejected():
    with pytest.raises(InstanceSemanticError):
        acmdp.from_entries(
            n_states=1,
            actions=[[0]],
            transitions=[(0, 0, 0, 0.5), (0, 0, 0, 0.5)],
            costs=[[(0, 0, 1.0)]],
        )


def test_row_sum_off_rejected():
    with pytest.raises(InstanceSemanticError):
        acmdp.from_entries(
            n_states=1,
            actions=[[0]],
            transitions=[(0, 0, 0, 0.9)],
            costs=[[(0, 0, 1.0)]],
        )


def test_negative_probability_rejected():
    with pytest.raises(InstanceSemanticError):
        acmdp.from_entries(
            n_states=2,
            actions=[[0], [0]],
            transitions=[(0, 0, 0, 1.2), (0, 0, 1, -0.2), (1, 0, 1, 1.0)],
            costs=[[(0, 0, 1.0), (1, 0, 1.0)]],
        )


def test_out_of_range_state_rejected():
    with pytest.raises(InstanceSemanticError):
        acmdp.from_entries(
            n_states=1,
            actions=[[0]],
            transitions=[(0, 0, 3, 1.0)],
            costs=[[(0, 0, 1.0)]],
        )


def test_inadmissible_pair_rejected():
    with pytest.raises(InstanceSemanticError):
        acmdp.from_entries(
            n_states=1,
            actions=[[0]],
            transitions=[(0, 1, 0, 1.0)],
            costs=[[(0, 0, 1.0)]],
        )


def test_duplicate_action_rejected():
    with pytest.raises(InstanceSemanticError):
        acmdp.from_entries(
            n_states=1,
            actions=[[0, 0]],
            transitions=[(0, 0, 0, 1.0)],
            costs=[[(0, 0, 1.0)]],
        )


def test_negative_cost_rejected():
    with pytest.raises(InstanceSemanticError):
        acmdp.from_entries(
            n_states=1,
            actions=[[0]],
            transitions=[(0, 0, 0, 1.0)],
            costs=[[(0, 0, -1.0)]],
        )


def test_instance_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = gen.random_mdp(rng, d=int(rng.integers(0, 3)))
        back = acmdp.load_instance(acmdp.save_instance(m))
        assert back.n_states == m.n_states
        assert back.actions == m.actions
        np.testing.assert_allclose(back.kernel, m.kernel, atol=1e-15)
        np.testing.assert_allclose(back.costs, m.costs, atol=1e-15)


def test_round_trip_preserves_budgets():
    m = acmdp.from_entries(
        n_states=1,
        actions=[[0, 1]],
        transitions=[(0, 0, 0, 1.0), (0, 1, 0, 1.0)],
        costs=[
            [(0, 0, 0.0), (0, 1, 1.0)],
            [(0, 0, 2.0), (0, 1, 0.0)],
        ],
        budgets=[1.5],
        name="mixing",
    )
    back = acmdp.load_instance(acmdp.save_instance(m))
    assert back.budgets == (1.5,)
    assert back.name == "mixing"


def test_save_instance_is_canonical():
    m = two_state()
    assert acmdp.save_instance(m) == acmdp.save_instance(two_state())


def test_load_rejects_bad_json():
    with pytest.raises(InstanceParseError):
        acmdp.load_instance("{not json")


def test_load_rejects_non_object():
    with pytest.raises(InstanceParseError):
        acmdp.load_instance("[]")


def test_load_rejects_missing_field():
    with pytest.raises(InstanceParseError):
        acmdp.load_instance('{"n_states": 2}')


def test_validate_reports_violations():
    m = two_state()
    bad = acmdp.FiniteMDP(
        n_states=2,
        actions=((0,), (0,)),
        kernel=np.array([[0.5, 0.4], [1.0, 0.0]]),
        costs=np.array([[1.0, -2.0]]),
        budgets=(),
        name=None,
    )
    assert acmdp.validate(m).violations == ()
    report = acmdp.validate(bad)
    assert any("sums to" in v for v in report.violations)
    assert any("negative" in v for v in report.violations)
    with pytest.raises(InvalidModelError):
        acmdp.require_valid(bad)


def test_queue_family_structure():
    spec = acmdp.QueueFamilySpec(0.3, 0.6, 1.0, 5.0, 4)
    m = acmdp.build_queue_truncation(spec)
    assert m.n_states == 5
    assert m.actions == tuple((0, 1) for _ in range(5))
    np.testing.assert_allclose(m.kernel.sum(axis=1), 1.0)
    # admitting in state 0 can reach state 1, rejecting cannot
    k_admit = m.pair_index[(0, 0)]
    k_reject = m.pair_index[(0, 1)]
    assert m.kernel[k_admit, 1] > 0.0
    assert m.kernel[k_reject, 1] == 0.0
    # rejecting pays the flat rejection charge on top of holding
    assert m.costs[0, k_reject] == pytest.approx(5.0)
    assert m.costs[0, m.pair_index[(3, 1)]] == pytest.approx(3.0 + 5.0)


def test_queue_spec_validation():
    with pytest.raises(ValueError):
        acmdp.QueueFamilySpec(1.3, 0.6, 1.0, 5.0, 4)
    with pytest.raises(ValueError):
        acmdp.QueueFamilySpec(0.3, 0.6, 1.0, 5.0, 0)
