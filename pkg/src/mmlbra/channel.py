"""Downlink channel: UMa pathloss, link gains, RSRP, interference, SINR, rates."""
from dataclasses import dataclass

import numpy as np

from . import kernels

SPEED_OF_LIGHT = 299_792_458.0


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=np.float64) - 30.0) / 10.0)


def watt_to_dbm(w):
    return 10.0 * np.log10(np.asarray(w, dtype=np.float64)) + 30.0


@dataclass(frozen=True)
class RadioConfig:
    n0_dbm_hz: float = -174.0
    subchannel_bw: float = 360e3
    n_subchannels: int = 80
    fc_ghz: float = 3.5

    def __post_init__(self):
        if self.subchannel_bw <= 0 or self.n_subchannels <= 0 or self.fc_ghz <= 0:
            raise ValueError("radio parameters must be positive")

    @property
    def noise_power(self):
        """N0 * W in watts."""
        return float(dbm_to_watt(self.n0_dbm_hz)) * self.subchannel_bw


def pathloss_uma_los(d3d, fc, h_bs=25.0, h_ut=1.5):
    d3d = np.asarray(d3d, dtype=np.float64)
    d_bp = 4.0 * (h_bs - 1.0) * (h_ut - 1.0) * fc * 1e9 / SPEED_OF_LIGHT
    pl1 = 28.0 + 22.0 * np.log10(d3d) + 20.0 * np.log10(fc)
    pl2 = (28.0 + 40.0 * np.log10(d3d) + 20.0 * np.log10(fc)
           - 9.0 * np.log10(d_bp ** 2 + (h_bs - h_ut) ** 2))
    # the 2-D breakpoint test is applied on d3d; differences are < 1 m at these heights
    return np.where(d3d <= d_bp, pl1, pl2)


def pathloss_uma(d3d, fc, h_bs=25.0, h_ut=1.5):
    """TR 38.901 UMa NLOS pathloss in dB (max of the LOS and NLOS' forms)."""
    d3d = np.asarray(d3d, dtype=np.float64)
    if np.any(d3d <= 0):
        raise ValueError("3-D distance must be positive")
    nlos = 13.54 + 39.08 * np.log10(d3d) + 20.0 * np.log10(fc) - 0.6 * (h_ut - 1.5)
    out = np.maximum(pathloss_uma_los(d3d, fc, h_bs, h_ut), nlos)
    return out if out.ndim else float(out)


def distances_3d(topology, positions):
    """(S, U) 3-D distances between O-RU antennas and user terminals."""
    diff = topology.oru_positions[:, None, :] - np.asarray(positions)[None, :, :]
    d2 = np.hypot(diff[..., 0], diff[..., 1])
    # TR 38.901 minimum 2-D distance for UMa
    d2 = np.maximum(d2, 10.0)
    return np.sqrt(d2 ** 2 + (topology.h_bs - topology.h_ut) ** 2)


def link_gains(topology, positions, radio, shadowing_db=None, pathloss=pathloss_uma):
    """Large-scale linear gains h = 10^(-(PL + shadowing)/10), shape (S, U)."""
    pl = pathloss(distances_3d(topology, positions), radio.fc_ghz, topology.h_bs, topology.h_ut)
    if shadowing_db is not None:
        pl = pl + shadowing_db
    return 10.0 ** (-np.asarray(pl) / 10.0)


def rsrp(gain, p_rs=1.0):
    """Received reference power in dBm for reference power ``p_rs`` W."""
    gain = np.asarray(gain, dtype=np.float64)
    if np.any(gain <= 0) or np.any(np.asarray(p_rs) <= 0):
        raise ValueError("gain and reference power must be positive")
    out = 10.0 * np.log10(p_rs * gain * 1000.0)
    return out if out.ndim else float(out)


def interference(u, s, n, allocation, gains, fading=None):
    """Co-channel interference (W) seen by user ``u`` of O-RU ``s`` on subchannel ``n``.

    Sums p * h over every other transmission on subchannel ``n``: other users
    of the same O-RU and every user of every other O-RU, whatever their O-DU.
    The gain is always the one from the interfering O-RU toward ``u``.
    ``gains`` is (S, U) or, with per-subchannel fading, (S, U, N).
    """
    gains = np.asarray(gains)
    total = 0.0
    for j in range(allocation.owner.shape[0]):
        k = allocation.owner[j, n]
        if k < 0 or (j == s and k == u):
            continue
        h = gains[j, u, n] if gains.ndim == 3 else gains[j, u]
        if fading is not None:
            h = h * fading[j, s, n]
        total += allocation.power[j, n] * h
    return total


def sinr(p, h, interf, radio):
    """Linear SINR p*h / (I + N0*W)."""
    return p * h / (interf + radio.noise_power)


def user_rate(u, s, allocation, sinr_per_subchannel, radio):
    """Shannon rate (bit/s) of user ``u`` over the subchannels it holds at O-RU ``s``."""
    held = allocation.owner[s] == u
    if not held.any():
        return 0.0
    g = np.asarray(sinr_per_subchannel)
    g = g[s] if g.ndim == 2 else g
    return float(np.sum(radio.subchannel_bw * np.log2(1.0 + g[held])))


def ru_sum_rate(s, association, user_rates):
    """Sum of per-user rates over the users served by O-RU ``s``."""
    served = np.asarray(association.serving) == s
    return float(np.sum(np.asarray(user_rates)[served]))


def snapshot_rates(allocation, gain, radio, n_users, fading=None):
    """SINR of every slot and the resulting per-user rates for one step."""
    g = kernels.sinr_grid(allocation.owner, allocation.power, gain, radio.noise_power, fading)
    rates = kernels.user_rates(allocation.owner, g, n_users, radio.subchannel_bw)
    return g, rates
