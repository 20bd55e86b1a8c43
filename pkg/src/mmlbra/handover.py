"""A3-event handover: trigger/leave inequalities and time-to-trigger gating."""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels

OFF_MIN, OFF_MAX = -15, 15
HYS_MIN, HYS_MAX = 0, 15
DEFAULT_TTT = 2.56


@dataclass(frozen=True)
class HandoverParams:
    off: int = 0
    hys: int = 0
    ttt: float = DEFAULT_TTT

    def __post_init__(self):
        if not OFF_MIN <= self.off <= OFF_MAX:
            raise ValueError(f"offset {self.off} dB outside [{OFF_MIN}, {OFF_MAX}]")
        if not HYS_MIN <= self.hys <= HYS_MAX:
            raise ValueError(f"hysteresis {self.hys} dB outside [{HYS_MIN}, {HYS_MAX}]")
        if self.ttt < 0:
            raise ValueError("ttt must be non-negative")


def a3_trigger(m_n, m_s, params):
    return m_n - params.hys > m_s + params.off


def a3_leave(m_n, m_s, params):
    return m_n + params.hys < m_s + params.off


def ttt_steps(ttt, dt):
    """Consecutive trigger steps needed before a handover fires."""
    return max(1, math.ceil(ttt / dt - 1e-9))


class A3TimerState:
    """Consecutive trigger-step counters for every (user, candidate O-RU)."""

    def __init__(self, n_users, n_orus, ttt=DEFAULT_TTT, dt=1.0):
        self.dt = dt
        self.ttt = ttt
        self.need = ttt_steps(ttt, dt)
        self.counts = np.zeros((n_users, n_orus), dtype=np.int64)

    @property
    def elapsed(self):
        """Seconds each trigger condition has held, capped at ``ttt``."""
        return np.minimum(self.counts * self.dt, self.ttt)

    def reset_user(self, u):
        self.counts[u] = 0


def tick_and_decide(timers, rsrp_table, serving, off, hys, free_subchannels=None):
    """Advance the A3 timers one step and return the handovers to execute.

    ``rsrp_table`` is (S, U) dBm, ``serving`` the serving O-RU per user and
    ``off``/``hys`` the per-O-RU parameters; each user is judged with its
    serving O-RU's pair. A handover needs a free subchannel at the target
    (``free_subchannels``, decremented as users are admitted); otherwise it
    is deferred and the timer stays at its cap. Returns a list of
    ``(user, target)`` pairs in user order.
    """
    best = kernels.a3_tick(rsrp_table, serving, np.asarray(off, dtype=np.float64),
                           np.asarray(hys, dtype=np.float64), timers.counts, timers.need)
    moves = []
    free = None if free_subchannels is None else np.array(free_subchannels, dtype=np.int64)
    for u in np.flatnonzero(best >= 0):
        target = int(best[u])
        if free is not None:
            if free[target] < 1:
                continue
            free[target] -= 1
        moves.append((int(u), target))
        timers.reset_user(u)
    return moves
