"""Per-step numeric kernels.

Each kernel has a numba loop version and a vectorised numpy version with
identical semantics. The public wrappers dispatch on ``_jit.USE_NUMBA``;
both variants stay importable so tests and the benchmark can compare them.
"""
import numpy as np

from . import _jit
from ._jit import njit


# ---------------------------------------------------------------------------
# SINR on every occupied (O-RU, subchannel) slot
# ---------------------------------------------------------------------------

@njit
def _sinr_grid_loop(owner, power, gain, fading, use_fading, noise):
    S, N = owner.shape
    out = np.zeros((S, N))
    for s in range(S):
        for n in range(N):
            u = owner[s, n]
            if u < 0:
                continue
            sig = 0.0
            interf = 0.0
            for j in range(S):
                if owner[j, n] < 0 or power[j, n] <= 0.0:
                    continue
                h = gain[j, u]
                if use_fading:
                    h *= fading[j, s, n]
                if j == s:
                    sig = power[j, n] * h
                else:
                    interf += power[j, n] * h
            out[s, n] = sig / (interf + noise)
    return out


def _sinr_grid_numpy(owner, power, gain, fading, use_fading, noise):
    occupied = owner >= 0
    users = np.where(occupied, owner, 0)
    # h[j, s, n]: gain from O-RU j toward the user holding slot (s, n)
    h = gain[:, users]
    if use_fading:
        h = h * fading
    tx = np.where(occupied & (power > 0.0), power, 0.0)
    rx = tx[:, None, :] * h
    S = owner.shape[0]
    idx = np.arange(S)
    sig = rx[idx, idx, :].copy()
    # zero the serving term rather than subtracting it, which would cancel badly
    rx[idx, idx, :] = 0.0
    interf = rx.sum(axis=0)
    return np.where(occupied, sig / (interf + noise), 0.0)


def sinr_grid(owner, power, gain, noise, fading=None):
    """SINR of the user holding each (O-RU, subchannel) slot.

    ``owner[s, n]`` is the user index on subchannel ``n`` of O-RU ``s`` (-1
    when idle), ``power[s, n]`` its transmit power in W and ``gain[s, u]``
    the large-scale link gain. ``fading[j, s, n]``, when given, multiplies
    the gain from O-RU ``j`` toward the user on slot ``(s, n)``. Idle slots
    return 0.
    """
    owner = np.ascontiguousarray(owner, dtype=np.int64)
    power = np.ascontiguousarray(power, dtype=np.float64)
    gain = np.ascontiguousarray(gain, dtype=np.float64)
    use_fading = fading is not None
    if not use_fading:
        fading = np.ones((1, 1, 1))
    else:
        fading = np.ascontiguousarray(fading, dtype=np.float64)
    fn = _sinr_grid_loop if _jit.USE_NUMBA else _sinr_grid_numpy
    return fn(owner, power, gain, fading, use_fading, float(noise))


# ---------------------------------------------------------------------------
# A3 time-to-trigger bookkeeping
# ---------------------------------------------------------------------------

@njit
def _a3_tick_loop(rsrp, serving, off, hys, counts, need):
    S, U = rsrp.shape
    best = np.full(U, -1, dtype=np.int64)
    for u in range(U):
        s = serving[u]
        if s < 0:
            continue
        ms = rsrp[s, u]
        o = off[s]
        hy = hys[s]
        best_val = -np.inf
        for c in range(S):
            if c == s:
                continue
            mn = rsrp[c, u]
            if mn - hy > ms + o:
                if counts[u, c] < need:
                    counts[u, c] += 1
            elif mn + hy < ms + o:
                counts[u, c] = 0
            if counts[u, c] >= need and mn > best_val:
                best_val = mn
                best[u] = c
    return best


def _a3_tick_numpy(rsrp, serving, off, hys, counts, need):
    S, U = rsrp.shape
    attached = serving >= 0
    s = np.where(attached, serving, 0)
    cols = np.arange(U)
    ms = rsrp[s, cols][:, None]
    mn = rsrp.T
    o = off[s][:, None]
    hy = hys[s][:, None]
    valid = attached[:, None] & (np.arange(S)[None, :] != s[:, None])
    trig = valid & (mn - hy > ms + o)
    leave = valid & ~trig & (mn + hy < ms + o)
    counts[trig] = np.minimum(counts[trig] + 1, need)
    counts[leave] = 0
    ready = valid & (counts >= need)
    score = np.where(ready, mn, -np.inf)
    best = np.argmax(score, axis=1)
    return np.where(ready.any(axis=1), best, -1).astype(np.int64)


def a3_tick(rsrp, serving, off, hys, counts, need):
    """Advance per-(user, candidate) trigger counters by one step, in place.

    Returns, per user, the max-RSRP candidate whose counter has reached
    ``need`` consecutive trigger steps, or -1. Counters hold their value when
    neither the trigger nor the leave inequality holds.
    """
    fn = _a3_tick_loop if _jit.USE_NUMBA else _a3_tick_numpy
    return fn(
        np.ascontiguousarray(rsrp, dtype=np.float64),
        np.ascontiguousarray(serving, dtype=np.int64),
        np.ascontiguousarray(off, dtype=np.float64),
        np.ascontiguousarray(hys, dtype=np.float64),
        counts,
        int(need),
    )


# ---------------------------------------------------------------------------
# Per-user rate from slot SINRs
# ---------------------------------------------------------------------------

@njit
def _user_rates_loop(owner, sinr, n_users, bandwidth):
    S, N = owner.shape
    rates = np.zeros(n_users)
    for s in range(S):
        for n in range(N):
            u = owner[s, n]
            if u >= 0:
                rates[u] += bandwidth * np.log2(1.0 + sinr[s, n])
    return rates


def _user_rates_numpy(owner, sinr, n_users, bandwidth):
    occupied = owner >= 0
    slot_rate = bandwidth * np.log2(1.0 + sinr[occupied])
    return np.bincount(owner[occupied], weights=slot_rate, minlength=n_users).astype(np.float64)


def user_rates(owner, sinr, n_users, bandwidth):
    fn = _user_rates_loop if _jit.USE_NUMBA else _user_rates_numpy
    return fn(np.ascontiguousarray(owner, dtype=np.int64),
              np.ascontiguousarray(sinr, dtype=np.float64),
              int(n_users), float(bandwidth))
