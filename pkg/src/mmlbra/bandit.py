"""Multi-armed bandit core: incremental action values, UCB and epsilon-greedy."""
import math

import numpy as np


class BanditTable:
    """Action values ``q``, pull counts ``n`` and total pulls ``m`` for one agent.

    Arms are addressed by index ``0..K-1``; ``arms`` keeps the action each
    index stands for. A pull is counted when the arm is selected
    (:meth:`pull`), so :meth:`update` divides by the post-pull count.
    """

    def __init__(self, arms):
        self.arms = list(arms)
        if not self.arms:
            raise ValueError("a bandit needs at least one arm")
        k = len(self.arms)
        self.q = np.zeros(k)
        self.n = np.zeros(k, dtype=np.int64)
        self.m = 0

    def __len__(self):
        return len(self.arms)

    def _check(self, arm):
        if not 0 <= arm < len(self.arms):
            raise KeyError(f"unknown arm {arm}")

    def pull(self, arm):
        self._check(arm)
        self.n[arm] += 1
        self.m += 1

    def update(self, arm, reward):
        self._check(arm)
        if self.n[arm] < 1:
            raise ValueError(f"arm {arm} updated before being pulled")
        self.q[arm] += (reward - self.q[arm]) / self.n[arm]

    def value(self, arm):
        """Current estimate, or ``None`` for an untried arm."""
        self._check(arm)
        return float(self.q[arm]) if self.n[arm] else None

    def untried(self):
        return np.flatnonzero(self.n == 0)

    def to_dict(self):
        return {
            "m": int(self.m),
            "arms": [list(a) if isinstance(a, tuple) else a for a in self.arms],
            "q": self.q.tolist(),
            "n": self.n.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        t = cls([tuple(a) if isinstance(a, list) else a for a in d["arms"]])
        t.q = np.asarray(d["q"], dtype=np.float64)
        t.n = np.asarray(d["n"], dtype=np.int64)
        t.m = int(d["m"])
        return t


def ucb_scores(table):
    with np.errstate(divide="ignore"):
        return table.q + np.sqrt(2.0 * math.log(max(table.m, 1)) / table.n)


def select_ucb(table, rng):
    """Uniformly random untried arm if any, else argmax of q + sqrt(2 ln m / n)."""
    untried = table.untried()
    if untried.size:
        return int(untried[rng.integers(untried.size)])
    return int(np.argmax(ucb_scores(table)))


def select_epsilon_greedy(table, epsilon, rng):
    """Uniform arm with probability ``epsilon``, else greedy; untried arms first."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(len(table)))
    untried = table.untried()
    if untried.size:
        return int(untried[0])
    return int(np.argmax(table.q))


class RewardScaler:
    """Min-max scaling into [0, 1] against the running extremes seen so far."""

    def __init__(self, enabled=True):
        self.enabled = enabled
        self.lo = math.inf
        self.hi = -math.inf

    def __call__(self, reward):
        if not self.enabled:
            return float(reward)
        self.lo = min(self.lo, reward)
        self.hi = max(self.hi, reward)
        span = self.hi - self.lo
        return 0.5 if span <= 0 else (reward - self.lo) / span

    def to_dict(self):
        # infinities are not valid JSON; an unseen extreme is stored as null
        finite = lambda v: v if math.isfinite(v) else None
        return {"enabled": self.enabled, "lo": finite(self.lo), "hi": finite(self.hi)}
