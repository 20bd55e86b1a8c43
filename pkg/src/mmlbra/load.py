"""Load accounting: subchannel demand, utilisation, imbalance, outage, objective."""
from collections import deque
from dataclasses import dataclass

import numpy as np


def demand_subchannels(D, C, W):
    """Subchannels needed to carry ``D`` bit/s at spectral efficiency ``C`` on width ``W``."""
    D, C = np.asarray(D, dtype=np.float64), np.asarray(C, dtype=np.float64)
    # guard against D/(C*W) landing a hair above an integer through rounding
    out = np.ceil(D / (C * W) * (1 - 1e-12)).astype(np.int64)
    out = np.maximum(out, 1)
    return int(out) if out.ndim == 0 else out


def ru_utilization(s, association, allocation):
    """Subchannels of O-RU ``s`` held by users it serves."""
    owners = allocation.owner[s]
    held = owners[owners >= 0]
    return int(np.count_nonzero(association.serving[held] == s))


def utilization_diff(s, utilizations):
    """Sum of |load_s - load_j| over every other O-RU in the network."""
    util = np.asarray(utilizations)
    total = np.abs(util[s] - np.delete(util, s)).sum()
    return total.item()


def utilization_diffs(utilizations):
    util = np.asarray(utilizations)
    return np.abs(util[:, None] - util[None, :]).sum(axis=1)


def load_std_dev(utilizations):
    return float(np.std(np.asarray(utilizations, dtype=np.float64)))


def outage_fraction(granted, needed):
    """Fraction of users holding fewer subchannels than they need."""
    granted, needed = np.asarray(granted), np.asarray(needed)
    if granted.size == 0:
        return 0.0
    return float(np.mean(granted < needed))


def rate_outage_fraction(rates, demands):
    rates, demands = np.asarray(rates), np.asarray(demands)
    return float(np.mean(rates < demands)) if rates.size else 0.0


class OutageTracker:
    """Sliding-window average of the instantaneous outage fraction."""

    def __init__(self, window=100):
        self._buf = deque(maxlen=window)

    def push(self, value):
        self._buf.append(float(value))
        return self.value

    @property
    def value(self):
        return float(np.mean(self._buf)) if self._buf else 0.0


def outage_probability(granted, needed, tracker=None):
    inst = outage_fraction(granted, needed)
    return tracker.push(inst) if tracker is not None else inst


def objective_value(eta, ru_rates, kappa, p_o, chi=None):
    """Sum over O-RUs of chi * (eta - kappa * (1 - p_o) * R)."""
    eta = np.asarray(eta, dtype=np.float64)
    ru_rates = np.asarray(ru_rates, dtype=np.float64)
    weight = np.ones_like(eta) if chi is None else np.asarray(chi).sum(axis=0)
    return float(np.sum(weight * (eta - kappa * (1.0 - p_o) * ru_rates)))


class SpectralEfficiency:
    """Per-O-RU spectral efficiency estimate kept as an exponential moving average."""

    def __init__(self, n_orus, initial=4.0, alpha=0.5, floor=0.1, ceiling=None):
        self.value = np.full(n_orus, float(initial))
        self.alpha = alpha
        self.floor = floor
        self.ceiling = ceiling

    def update(self, serving, owner, sinr):
        """Blend in each O-RU's mean log2(1 + SINR) over its served users."""
        S = len(self.value)
        for s in range(S):
            slots = owner[s] >= 0
            if not slots.any():
                continue
            se = np.log2(1.0 + sinr[s, slots])
            users = owner[s, slots]
            per_user = np.bincount(users, weights=se) / np.maximum(np.bincount(users), 1)
            obs = per_user[np.unique(users)].mean()
            if self.ceiling is not None:
                obs = min(obs, self.ceiling)
            self.value[s] = (1 - self.alpha) * self.value[s] + self.alpha * max(obs, self.floor)
        return self.value


@dataclass
class MetricsRecord:
    step: int
    utilization: np.ndarray
    std_dev: float
    eta: np.ndarray
    sum_rate: float
    p_o: float
    eff_sum_rate: float
    objective: float
    handovers: int = 0
    outage_now: float = 0.0
