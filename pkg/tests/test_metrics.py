import math

import numpy as np
import pytest

from osa.ccucb.metrics import (
    BoundParams,
    cumulative_regret,
    event_rate,
    initial_exploration_ok,
    mean_and_se,
    network_throughput,
    optimal_set_fraction,
    optimal_value,
    regret_from_pulls,
    slot_throughput,
    suboptimal_pulls_bound,
    theorem1_bound,
)
from osa.ccucb.policy import RunTrace
from osa.ccucb.scenario import SCENARIO1_ROW

SCENARIO1 = np.array([SCENARIO1_ROW] * 3)


def _fixed_trace(channels, horizon):
    trace = RunTrace.empty(horizon, len(channels))
    trace.channels[:] = channels
    return trace


def test_optimal_value():
    assert optimal_value(SCENARIO1) == pytest.approx(2.4)


def test_worst_channels_regret_slope():
    regret = cumulative_regret(_fixed_trace([0, 1, 2], 300), SCENARIO1)
    assert regret.horizon == 300
    assert regret.regret[0] == 0.0
    increments = np.diff(regret.regret)
    assert increments == pytest.approx(np.full(300, 2.0 / 3.0))
    assert regret.per_user[10] == pytest.approx([7.0, 7.0, 6.0])


def test_oracle_regret_has_no_drift():
    regret = cumulative_regret(_fixed_trace([7, 8, 9], 1000), SCENARIO1)
    assert np.abs(regret.regret).max() < 1e-9


def test_collisions_forfeit_expected_reward():
    trace = _fixed_trace([9, 9, 8], 10)
    trace.su_collision[:, :2] = True
    regret = cumulative_regret(trace, SCENARIO1)
    # 每个时隙只得到 0.8
    assert regret.regret[10] == pytest.approx(10 * (2.4 - 0.8) / 3)


def test_realized_regret_uses_rewards():
    trace = _fixed_trace([7, 8, 9], 4)
    trace.rewards[:] = 1
    regret = cumulative_regret(trace, SCENARIO1, realized=True)
    assert regret.regret[4] == pytest.approx(4 * (0.8 - 1.0))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        cumulative_regret(_fixed_trace([0, 1], 5), SCENARIO1)
    with pytest.raises(ValueError):
        cumulative_regret(_fixed_trace([0, 1, 12], 5), SCENARIO1)


def test_scenario1_bound_coefficient():
    params = BoundParams.from_weights(SCENARIO1, 1.1)
    assert params.optimal_set == (7, 8, 9)
    assert params.lambda_bar_star == pytest.approx(0.8)
    assert [params.gaps[n] for n in range(7)] == pytest.approx([0.6, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1])
    assert params.coefficient() == pytest.approx(54593 / 900)
    assert theorem1_bound(params, 100_000) == pytest.approx(54593 / 900 * math.log(100_002))


def test_single_user_bound_reduces_to_ucb1():
    params = BoundParams.from_weights([[0.9, 0.5]], 2.0)
    assert params.coefficient() == pytest.approx(20.0)
    assert theorem1_bound(params, 1) == 0.0
    assert theorem1_bound(params, 1000) == pytest.approx(20.0 * math.log(1000))


def test_bound_errors():
    with pytest.raises(ValueError, match="degenerate gap"):
        theorem1_bound(BoundParams.from_weights([[0.5, 0.5, 0.1]], 2.0), 100)
    with pytest.raises(ValueError):
        theorem1_bound(BoundParams.from_weights(SCENARIO1, 1.0), 100)
    with pytest.raises(ValueError):
        BoundParams.from_weights([[0.1, 0.2], [0.2, 0.1]], 2.0)


def test_pull_based_bounds():
    assert suboptimal_pulls_bound(0.4, 2.0, 1000, 1) == pytest.approx(50.0 * math.log(1000))
    with pytest.raises(ValueError, match="degenerate gap"):
        suboptimal_pulls_bound(0.0, 2.0, 10, 1)
    params = BoundParams.from_weights([[0.9, 0.5]], 2.0)
    assert regret_from_pulls(params, [100, 10]) == pytest.approx(4.0)
    assert initial_exploration_ok(np.array([3, 4, 3]), 3)
    assert not initial_exploration_ok(np.array([3, 2, 5]), 3)


def test_optimal_set_fraction_of_oracle():
    fraction = optimal_set_fraction(_fixed_trace([9, 7, 8], 50), SCENARIO1)
    assert fraction[0] == 0.0
    assert np.all(fraction[1:] == 1.0)


def test_optimal_set_fraction_of_random_injective_assignments():
    rng = np.random.default_rng(17)
    horizon = 20_000
    trace = RunTrace.empty(horizon, 3)
    for t in range(horizon):
        trace.channels[t] = rng.permutation(10)[:3]
    fraction = optimal_set_fraction(trace, SCENARIO1)
    assert abs(fraction[-1] - 0.3) < 0.01


def test_throughput_of_perfect_network():
    trace = RunTrace.empty(20, 4)
    trace.rewards[:] = 1
    assert np.all(slot_throughput(trace) == 4000.0)
    result = network_throughput([trace, trace])
    assert np.all(result.ntp == 4000.0)
    assert np.all(result.se == 0.0)
    assert result.n_users == 4
    with pytest.raises(ValueError):
        network_throughput([])


def test_event_rate():
    flags = np.array([[True, False], [False, False], [True, True]])
    assert event_rate(flags).tolist() == pytest.approx([0.0, 0.5, 0.25, 0.5])


@pytest.mark.parametrize("alpha", [1.1, 2.0, 3.0])
def test_bound_grows_with_time(alpha):
    params = BoundParams.from_weights(SCENARIO1, alpha)
    values = [theorem1_bound(params, t) for t in (10, 100, 10_000, 100_000, 1_000_000)]
    assert all(a < b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("t", [10, 1000, 100_000])
def test_bound_grows_with_alpha(t):
    values = [theorem1_bound(BoundParams.from_weights(SCENARIO1, a), t) for a in (1.1, 1.5, 2.0, 3.0)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_bound_shrinks_as_gap_widens():
    # 两个用户, 最优集合 {0, 1}, Delta = 0.7 - x
    values = [
        theorem1_bound(BoundParams.from_weights([[0.9, 0.7, x]] * 2, 2.0), 10_000)
        for x in (0.6, 0.5, 0.3, 0.1)
    ]
    assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("channel", range(7))
def test_widening_one_gap_lowers_bound(channel):
    base = theorem1_bound(BoundParams.from_weights(SCENARIO1, 1.1), 100_000)
    row = list(SCENARIO1_ROW)
    row[channel] -= 0.05
    params = BoundParams.from_weights([row] * 3, 1.1)
    assert params.gaps[channel] == pytest.approx(SCENARIO1_ROW[7] - row[channel])
    assert theorem1_bound(params, 100_000) < base


def test_mean_and_se():
    per_run = np.array([[1.0, 2.0], [3.0, 2.0], [5.0, 2.0]])
    mean, se = mean_and_se(per_run)
    assert mean.tolist() == [3.0, 2.0]
    assert se == pytest.approx([2.0 / math.sqrt(3), 0.0])
    mean, se = mean_and_se(per_run[:1])
    assert mean.tolist() == [1.0, 2.0]
    assert se.tolist() == [0.0, 0.0]
