import math

import numpy as np
import pytest

from osa.ccucb.bandit import UcbState


def _state(mode="individual", k=3, n=4, alpha=1.1):
    return UcbState(n_users=k, n_channels=n, alpha=alpha, mode=mode)


def test_update_counts_and_mean():
    state = _state(k=1, n=2)
    state.update(0, 0, 1)
    assert state.pulls[0, 0] == 1
    assert state.reward_sums[0, 0] == 1
    assert state.mean(0, 0) == 1.0

    for r in (1, 1, 0, 0):
        state.update(0, 1, r)
    state.update(0, 1, 0)
    assert state.mean(0, 1) == pytest.approx(0.4)


def test_mean_of_bernoulli_updates():
    rng = np.random.default_rng(1)
    state = _state(k=1, n=1)
    rewards = (rng.random(100_000) < 0.72).astype(np.int8)
    state.update_many(np.zeros(len(rewards), dtype=np.int64), np.zeros(len(rewards), dtype=np.int64), rewards)
    assert 0.714 <= state.mean(0, 0) <= 0.726
    assert state.pulls.sum() == 100_000


def test_index_formula():
    state = _state(k=1, n=1)
    for _ in range(100):
        state.update(0, 0, 1)
    assert state.index(0, 0, 100) == pytest.approx(1 + math.sqrt(1.1 * math.log(100) / 100))
    assert state.index(0, 0, 100) == pytest.approx(1.2251, abs=1e-4)


def test_unexplored_channel_is_infinite():
    state = _state()
    assert state.index(1, 2, 10) == math.inf
    assert np.all(np.isinf(state.learner_indices(5)))


def test_zero_alpha_gives_sample_mean():
    state = _state(k=1, n=1, alpha=0.0)
    for r in (1, 0, 1, 1):
        state.update(0, 0, r)
    assert state.index(0, 0, 1234) == 0.75


def test_index_monotone_in_t_and_pulls():
    a = _state(k=1, n=2)
    for _ in range(5):
        a.update(0, 0, 1)
    for _ in range(10):
        a.update(0, 1, 1)
    assert a.index(0, 0, 50) < a.index(0, 0, 500)
    assert a.index(0, 1, 50) < a.index(0, 0, 50)


def test_rotation_order():
    state = _state(k=3, n=2)
    for k in range(3):
        state.update(k, 0, 1)
        for _ in range(k + 1):
            state.update(k, 1, 0)
    rows = state.user_indices(5)
    for t, order in ((0, (0, 1, 2)), (1, (1, 2, 0)), (3, (0, 1, 2))):
        b = state.index_matrix(t)
        expected = state.user_indices(t)[list(order)]
        assert np.array_equal(b.values, expected)
        assert b.slot == t
    assert rows.shape == (3, 2)


def test_rotation_preserves_rows():
    state = _state(k=3, n=3)
    rng = np.random.default_rng(0)
    for _ in range(200):
        state.update(int(rng.integers(3)), int(rng.integers(3)), int(rng.integers(2)))
    base = sorted(map(tuple, state.user_indices(7)))
    rotated = sorted(map(tuple, state.index_matrix(7).values))
    assert base == rotated


def test_shared_mode_has_one_learner_and_identical_rows():
    state = _state(mode="shared", k=3, n=4)
    assert state.n_learners == 1
    state.update_many(np.zeros(3, dtype=np.int64), np.array([0, 1, 2]), np.array([1, 0, 1]))
    rows = state.index_matrix(4).values
    assert rows.shape == (3, 4)
    assert np.all(rows == rows[0])
    assert state.total_pulls() == 3


def test_invalid_construction():
    with pytest.raises(ValueError):
        UcbState(n_users=2, n_channels=3, alpha=1.0, mode="mixed")
    with pytest.raises(ValueError):
        _state().index(0, 0, 0)
