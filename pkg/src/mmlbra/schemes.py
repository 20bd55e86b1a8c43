"""Control policies: bandit load balancing, subchannel/power allocation and baselines.

A scheme is a load-balancing (LB) policy crossed with a resource-allocation
(RA) policy and a power policy; :data:`SCHEMES` lists the five combinations
the simulator knows about.
"""
import math
from dataclasses import dataclass

import numpy as np

from .bandit import BanditTable, RewardScaler, select_epsilon_greedy, select_ucb
from .handover import DEFAULT_TTT, HYS_MAX, HYS_MIN, OFF_MAX, OFF_MIN, HandoverParams

FULL_OFFSETS = tuple(range(OFF_MIN, OFF_MAX + 1))
FULL_HYSTERESES = tuple(range(HYS_MIN, HYS_MAX + 1))
DESK_OFFSETS = (-15, -10, -5, 0, 5, 10, 15)
DESK_HYSTERESES = (0, 3, 6, 9, 12, 15)


def handover_set(offsets=FULL_OFFSETS, hystereses=FULL_HYSTERESES):
    """All (Off, Hys) pairs, offset-major."""
    return [(int(o), int(h)) for o in offsets for h in hystereses]


@dataclass(frozen=True)
class PALevels:
    thresholds: tuple = (-80.0, -90.0, -100.0)
    levels: tuple = (0.5, 1.25, 3.75, 5.0)

    def __post_init__(self):
        t, p = self.thresholds, self.levels
        if len(t) != 3 or len(p) != 4:
            raise ValueError("expected three RSRP thresholds and four power levels")
        if not (t[0] > t[1] > t[2]):
            raise ValueError("thresholds must be strictly decreasing")
        if not all(a < b for a, b in zip(p, p[1:])):
            raise ValueError("power levels must be strictly increasing")


def pa_level(rsrp_dbm, levels, inverted=False):
    """Index into ``levels.levels`` chosen by the RSRP cascade (vectorised)."""
    r = np.asarray(rsrp_dbm, dtype=np.float64)
    t1, t2, t3 = levels.thresholds
    idx = np.where(r >= t1, 3, np.where(r >= t2, 2, np.where(r >= t3, 1, 0)))
    if inverted:
        idx = 3 - idx
    return idx


def pa_assign(rsrp_dbm, levels=PALevels(), inverted=False):
    """Per-subchannel power: p4 above T1, p3 above T2, p2 above T3, else p1."""
    out = np.asarray(levels.levels)[pa_level(rsrp_dbm, levels, inverted)]
    return float(out) if np.ndim(out) == 0 else out


def enforce_power_cap(owner, power, p_max, levels=PALevels(), user_rsrp=None):
    """Bring one O-RU's total power under ``p_max``, in place.

    The highest-power slot is stepped down one level at a time (ties: lowest
    user RSRP first, then lowest subchannel). Once every slot sits at the
    lowest level, slots of the weakest users are released. Returns the
    number of released slots.
    """
    if not p_max > 0:
        raise ValueError("p_max must be positive")
    total = power.sum()
    if not math.isfinite(p_max) or total <= p_max * (1 + 1e-12):
        return 0
    lv = np.asarray(levels.levels)
    slots = np.flatnonzero(owner >= 0)
    if user_rsrp is None:
        weak = np.zeros(slots.size)
    else:
        weak = np.asarray(user_rsrp)[owner[slots]]
    # process weakest-first within a level, then by subchannel index
    order = slots[np.lexsort((slots, weak))]
    level = np.searchsorted(lv, power[order] - 1e-12)
    level = np.minimum(level, len(lv) - 1)
    excess = total - p_max
    for top in range(len(lv) - 1, 0, -1):
        at_top = np.flatnonzero(level == top)
        if at_top.size == 0:
            continue
        delta = lv[top] - lv[top - 1]
        k = math.ceil(excess / delta - 1e-12)
        if k <= at_top.size:
            level[at_top[:k]] = top - 1
            excess -= k * delta
            break
        level[at_top] = top - 1
        excess -= at_top.size * delta
    power[order] = lv[level]
    released = 0
    if excess > 1e-9:
        k = min(math.ceil(excess / lv[0] - 1e-12), order.size)
        drop = order[:k]
        owner[drop] = -1
        power[drop] = 0.0
        released = k
    return released


def snap(value, allowed):
    allowed = np.asarray(allowed)
    return int(allowed[np.argmin(np.abs(allowed - value))])


def rlbra_params(omega, N, offsets=FULL_OFFSETS, hystereses=FULL_HYSTERESES, ttt=DEFAULT_TTT):
    """Load-proportional (Off, Hys): an idle O-RU retains users, a full one sheds them."""
    if omega < 0:
        raise ValueError("utilisation must be non-negative")
    u = min(omega / N, 1.0)
    off = math.floor(OFF_MAX - (OFF_MAX - OFF_MIN) * u + 0.5)
    hys = math.floor(HYS_MAX * (1.0 - u) + 0.5)
    return HandoverParams(snap(off, offsets), snap(hys, hystereses), ttt)


def default_params(ttt=DEFAULT_TTT):
    return HandoverParams(0, 0, ttt)


# ---------------------------------------------------------------------------
# Subchannel assignment rules; each returns one O-RU's owner row
# ---------------------------------------------------------------------------

def contiguous_blocks(users, sizes, start, N):
    """Give ``users`` (in order) contiguous blocks from ``start``, wrapping mod N.

    Blocks are truncated once the N subchannels are used up.
    """
    row = np.full(N, -1, dtype=np.int64)
    sizes = np.asarray(sizes, dtype=np.int64)
    if len(users) == 0:
        return row
    ends = np.minimum(np.cumsum(sizes), N)
    grant = np.diff(np.concatenate([[0], ends]))
    total = int(ends[-1])
    idx = (start + np.arange(total)) % N
    row[idx] = np.repeat(np.asarray(users, dtype=np.int64), grant)
    return row


def round_robin_alloc(users, demands, N):
    """One subchannel per pass to every user with unmet demand, in id order."""
    row = np.full(N, -1, dtype=np.int64)
    users = np.asarray(users, dtype=np.int64)
    order = np.argsort(users, kind="stable")
    users = users[order]
    left = np.asarray(demands, dtype=np.int64)[order].copy()
    n = 0
    while n < N and (left > 0).any():
        for i in np.flatnonzero(left > 0):
            if n == N:
                break
            row[n] = users[i]
            left[i] -= 1
            n += 1
    return row


def max_throughput_alloc(users, demands, rsrp, N):
    """Full demand to the strongest users first, packed from subchannel 0."""
    users = np.asarray(users, dtype=np.int64)
    order = np.argsort(-np.asarray(rsrp)[users], kind="stable")
    return contiguous_blocks(users[order], np.asarray(demands)[order], 0, N)


# ---------------------------------------------------------------------------
# Agents
# ---------------------------------------------------------------------------

class BanditAgent:
    """One O-RU's bandit: picks arms with UCB or epsilon-greedy, learns from rewards."""

    def __init__(self, arms, rng, policy="ucb", epsilon=0.1, normalize=True):
        self.table = BanditTable(arms)
        self.rng = rng
        self.policy = policy
        self.epsilon = epsilon
        self.scaler = RewardScaler(normalize)
        self.current = None

    def select(self):
        if self.policy == "ucb":
            arm = select_ucb(self.table, self.rng)
        else:
            arm = select_epsilon_greedy(self.table, self.epsilon, self.rng)
        self.table.pull(arm)
        self.current = arm
        return self.table.arms[arm]

    def reward(self, raw):
        if self.current is None:
            return
        self.table.update(self.current, self.scaler(raw))

    def to_dict(self):
        return {"policy": self.policy, "current": self.current,
                "scaler": self.scaler.to_dict(), "table": self.table.to_dict()}


class BanditLB:
    """Per-O-RU handover-parameter agents rewarded with the negated imbalance."""

    kind = "bandit"

    def __init__(self, n_orus, theta, rngs, policy="ucb", epsilon=0.1, normalize=True,
                 ttt=DEFAULT_TTT, settle_steps=0):
        self.agents = [BanditAgent(theta, rngs[s], policy, epsilon, normalize) for s in range(n_orus)]
        self.ttt = ttt
        self.settle_steps = settle_steps
        self._samples = [[] for _ in range(n_orus)]
        self._since = 0
        self.params = np.zeros((n_orus, 2), dtype=np.int64)

    def act(self, utilization, N):
        for s, agent in enumerate(self.agents):
            if agent.current is not None and self._samples[s]:
                agent.reward(-float(np.mean(self._samples[s])))
            self._samples[s] = []
            self.params[s] = agent.select()
        self._since = 0
        return self.params

    def observe(self, eta):
        self._since += 1
        if self._since <= self.settle_steps:
            return
        for s, v in enumerate(eta):
            self._samples[s].append(float(v))

    def to_dict(self):
        return [a.to_dict() for a in self.agents]


class RuleLB:
    kind = "rule"

    def __init__(self, n_orus, theta, ttt=DEFAULT_TTT):
        self.offsets = sorted({o for o, _ in theta})
        self.hystereses = sorted({h for _, h in theta})
        self.ttt = ttt
        self.params = np.zeros((n_orus, 2), dtype=np.int64)

    def act(self, utilization, N):
        for s, omega in enumerate(utilization):
            p = rlbra_params(omega, N, self.offsets, self.hystereses, self.ttt)
            self.params[s] = (p.off, p.hys)
        return self.params

    def observe(self, eta):
        pass

    def to_dict(self):
        return {"rule": "load-proportional"}


class FixedLB:
    kind = "fixed"

    def __init__(self, n_orus, ttt=DEFAULT_TTT):
        p = default_params(ttt)
        self.params = np.tile([p.off, p.hys], (n_orus, 1)).astype(np.int64)

    def act(self, utilization, N):
        return self.params

    def observe(self, eta):
        pass

    def to_dict(self):
        return {"rule": "fixed", "off": 0, "hys": 0}


class BanditSA:
    """Per-O-RU start-offset agents; users get contiguous blocks in RSRP order."""

    kind = "bandit"

    def __init__(self, n_orus, N, rngs, policy="ucb", epsilon=0.1, normalize=True):
        self.N = N
        self.agents = [BanditAgent(list(range(N)), rngs[s], policy, epsilon, normalize)
                       for s in range(n_orus)]

    def allocate(self, s, users, demands, rsrp):
        start = self.agents[s].select()
        order = np.argsort(-rsrp[users], kind="stable")
        return contiguous_blocks(users[order], demands[order], start, self.N)

    def reward(self, s, mean_rate):
        self.agents[s].reward(mean_rate)

    def to_dict(self):
        return [a.to_dict() for a in self.agents]


class RoundRobinSA:
    kind = "round_robin"

    def __init__(self, N):
        self.N = N

    def allocate(self, s, users, demands, rsrp):
        return round_robin_alloc(users, demands, self.N)

    def reward(self, s, mean_rate):
        pass

    def to_dict(self):
        return {"rule": "round-robin"}


class MaxThroughputSA:
    kind = "max_throughput"

    def __init__(self, N):
        self.N = N

    def allocate(self, s, users, demands, rsrp):
        return max_throughput_alloc(users, demands, rsrp, self.N)

    def reward(self, s, mean_rate):
        pass

    def to_dict(self):
        return {"rule": "max-throughput"}


@dataclass(frozen=True)
class SchemeSpec:
    lb: str      # "ucb" | "egreedy" | "rule" | "fixed"
    sa: str      # "ucb" | "egreedy" | "round_robin" | "max_throughput"
    power: str   # "pa" | "equal"


SCHEMES = {
    "mmlbra": SchemeSpec("ucb", "ucb", "pa"),
    "epsilon_greedy": SchemeSpec("egreedy", "egreedy", "pa"),
    "rlbra": SchemeSpec("rule", "max_throughput", "equal"),
    "default": SchemeSpec("fixed", "round_robin", "equal"),
    "no_ra": SchemeSpec("ucb", "round_robin", "equal"),
}


def scheme_spec(name):
    try:
        return SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; expected one of {sorted(SCHEMES)}") from None
