import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmlbra.bandit import (BanditTable, RewardScaler, select_epsilon_greedy, select_ucb,
                           ucb_scores)


def test_incremental_update_examples():
    t = BanditTable(["a", "b"])
    t.pull(0)
    t.update(0, 5.0)
    assert t.q[0] == 5.0
    t.q[1], t.n[1] = 4.0, 1
    t.pull(1)
    t.update(1, 6.0)
    assert t.q[1] == 5.0
    assert t.m == 2


def test_update_errors():
    t = BanditTable(range(3))
    with pytest.raises(KeyError):
        t.pull(3)
    with pytest.raises(ValueError):
        t.update(1, 1.0)
    with pytest.raises(ValueError):
        BanditTable([])


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200))
def test_q_is_running_mean(rewards):
    t = BanditTable([0])
    for r in rewards:
        t.pull(0)
        t.update(0, r)
    assert t.q[0] == pytest.approx(np.mean(rewards), abs=1e-9)
    assert t.n[0] == len(rewards) == t.m


def test_untried_arm_first():
    t = BanditTable(["a", "b"])
    t.pull(0)
    t.update(0, 100.0)
    assert select_ucb(t, np.random.default_rng(0)) == 1


def test_ucb_score_example():
    t = BanditTable(["a", "b"])
    t.q[:] = [1.0, 0.5]
    t.n[:] = [1, 1]
    t.m = 2
    np.testing.assert_allclose(ucb_scores(t), [2.177, 1.677], atol=1e-3)
    assert select_ucb(t, np.random.default_rng(0)) == 0


def test_bonus_dominance():
    t = BanditTable(["a", "b"])
    t.q[:] = [0.0, 10.0]
    t.n[:] = [1, 10 ** 6]
    t.m = 10 ** 6 + 1
    assert select_ucb(t, np.random.default_rng(0)) == 1
    # a's bonus sqrt(2 ln m) overtakes the gap of 10 once ln m > 50
    t.m = 10 ** 22
    assert select_ucb(t, np.random.default_rng(0)) == 0


def test_first_pulls_cover_every_arm():
    t = BanditTable(range(42))
    rng = np.random.default_rng(3)
    seen = []
    for _ in range(42):
        a = select_ucb(t, rng)
        t.pull(a)
        t.update(a, 0.0)
        seen.append(a)
    assert sorted(seen) == list(range(42))
    assert seen != list(range(42))  # random order


def test_ucb_ties_lowest_index():
    t = BanditTable(range(4))
    t.q[:] = [0.0, 1.0, 1.0, 0.5]
    t.n[:] = 2
    t.m = 8
    assert select_ucb(t, np.random.default_rng(0)) == 1


def test_epsilon_greedy_rules():
    rng = np.random.default_rng(0)
    t = BanditTable(range(3))
    t.n[:] = [1, 1, 0]
    t.q[:] = [5.0, 1.0, 0.0]
    assert select_epsilon_greedy(t, 0.0, rng) == 2
    t.n[2] = 1
    assert select_epsilon_greedy(t, 0.0, rng) == 0
    with pytest.raises(ValueError):
        select_epsilon_greedy(t, 1.5, rng)


def test_epsilon_one_is_uniform():
    rng = np.random.default_rng(11)
    t = BanditTable(range(5))
    t.n[:] = 1
    t.q[:] = [9.0, 0, 0, 0, 0]
    draws = np.bincount([select_epsilon_greedy(t, 1.0, rng) for _ in range(100_000)], minlength=5)
    expected = 100_000 / 5
    chi2 = float(((draws - expected) ** 2 / expected).sum())
    # 4 degrees of freedom; 18.47 is the 0.999 quantile
    assert chi2 < 18.47


def test_reward_scaler():
    sc = RewardScaler()
    assert sc(3.0) == 0.5
    assert sc(5.0) == 1.0
    assert sc(4.0) == 0.5
    assert sc(1.0) == 0.0
    assert RewardScaler(False)(-7.0) == -7.0
    assert RewardScaler().to_dict() == {"enabled": True, "lo": None, "hi": None}


def test_table_round_trip():
    t = BanditTable([(0, 3), (5, 6)])
    t.pull(1)
    t.update(1, 2.5)
    u = BanditTable.from_dict(t.to_dict())
    assert u.arms == t.arms and u.m == t.m
    assert (u.q == t.q).all() and (u.n == t.n).all()
    assert t.value(0) is None and t.value(1) == 2.5
