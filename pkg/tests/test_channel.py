import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmlbra import channel
from mmlbra.core import Allocation, Association
from mmlbra.channel import RadioConfig

RADIO = RadioConfig()


def _nlos_by_hand(d2d, fc=3.5, h_bs=25.0, h_ut=1.5):
    d3d = math.sqrt(d2d ** 2 + (h_bs - h_ut) ** 2)
    d_bp = 4 * (h_bs - 1) * (h_ut - 1) * fc * 1e9 / 3e8
    los = (28 + 22 * math.log10(d3d) + 20 * math.log10(fc) if d3d <= d_bp else
           28 + 40 * math.log10(d3d) + 20 * math.log10(fc)
           - 9 * math.log10(d_bp ** 2 + (h_bs - h_ut) ** 2))
    nlos = 13.54 + 39.08 * math.log10(d3d) + 20 * math.log10(fc) - 0.6 * (h_ut - 1.5)
    return max(los, nlos)


def test_pathloss_500m():
    d3d = math.hypot(500.0, 23.5)
    pl = channel.pathloss_uma(d3d, 3.5, 25.0, 1.5)
    assert pl == pytest.approx(_nlos_by_hand(500.0), abs=0.05)
    assert pl == pytest.approx(129.9, abs=0.05)


@pytest.mark.parametrize("d2d", [10.0, 35.0, 100.0, 300.0, 1000.0, 3000.0])
def test_pathloss_matches_hand_evaluation(d2d):
    d3d = math.hypot(d2d, 23.5)
    assert channel.pathloss_uma(d3d, 3.5) == pytest.approx(_nlos_by_hand(d2d), abs=0.05)


def test_pathloss_monotone():
    d = lambda x: math.hypot(x, 23.5)
    assert channel.pathloss_uma(d(100), 3.5) < channel.pathloss_uma(d(500), 3.5) \
        < channel.pathloss_uma(d(1000), 3.5)


def test_pathloss_rejects_zero_distance():
    with pytest.raises(ValueError):
        channel.pathloss_uma(0.0, 3.5)


def test_rsrp_values():
    assert channel.rsrp(1e-10, 1.0) == pytest.approx(-70.0)
    assert channel.rsrp(1.0, 0.001) == pytest.approx(0.0)
    assert channel.rsrp(1e-13, 1.0) == pytest.approx(-100.0)
    with pytest.raises(ValueError):
        channel.rsrp(0.0)


def test_noise_floor():
    assert RADIO.noise_power == pytest.approx(1.433e-15, rel=1e-3)


def test_sinr_examples():
    g = channel.sinr(1.25, 1e-10, 0.0, RADIO)
    assert g == pytest.approx(8.72e4, rel=1e-3)
    assert 10 * math.log10(g) == pytest.approx(49.4, abs=0.05)
    assert channel.sinr(0.0, 1e-10, 0.0, RADIO) == 0.0
    nf = RADIO.noise_power
    assert channel.sinr(1.0, 10 * nf, 9 * nf, RADIO) == pytest.approx(1.0)


def test_user_rate_examples():
    alloc = Allocation.empty(1, 4)
    g = np.full((1, 4), 8.72e4)
    assert channel.user_rate(0, 0, alloc, g, RADIO) == 0.0
    alloc.owner[0, 1] = 0
    one = channel.user_rate(0, 0, alloc, g, RADIO)
    assert one == pytest.approx(5.91e6, rel=2e-3)
    alloc.owner[0, 3] = 0
    assert channel.user_rate(0, 0, alloc, g, RADIO) == pytest.approx(2 * one, rel=1e-12)


def test_ru_sum_rate():
    a = Association(np.array([0, 0, 1]))
    assert channel.ru_sum_rate(0, a, [1e6, 2e6, 5e6]) == 3e6
    assert channel.ru_sum_rate(2, a, [1e6, 2e6, 5e6]) == 0.0


def test_interference_small_cases():
    alloc = Allocation.empty(2, 3)
    alloc.owner[0, 1] = 0
    alloc.power[0, 1] = 1.0
    gains = np.full((2, 2), 1e-12)
    assert channel.interference(0, 0, 1, alloc, gains) == 0.0
    alloc.owner[1, 1] = 1
    alloc.power[1, 1] = 1.25
    assert channel.interference(0, 0, 1, alloc, gains) == pytest.approx(1.25e-12)


def _random_state(rng, S, U, N, fill=0.7):
    owner = np.where(rng.random((S, N)) < fill, rng.integers(0, U, (S, N)), -1)
    power = np.where(owner >= 0, rng.choice([0.5, 1.25, 3.75, 5.0], (S, N)), 0.0)
    gain = 10 ** rng.uniform(-13, -8, (S, U))
    return Allocation(owner, power), gain


def _brute_interference(psi, power, gain, u, s, n, fading=None):
    """Sum over every (j, k) tuple holding subchannel n, except (s, u) itself."""
    S, U, _ = psi.shape
    tot = 0.0
    for j in range(S):
        for k in range(U):
            if psi[j, k, n] and not (j == s and k == u):
                h = gain[j, u] * (1.0 if fading is None else fading[j, s, n])
                tot += power[j, n] * h
    return tot


@pytest.mark.parametrize("use_fading", [False, True])
def test_sinr_grid_and_interference_against_tensor_oracle(rng, use_fading):
    S, U, N = 3, 6, 5
    alloc, gain = _random_state(rng, S, U, N)
    fading = rng.exponential(1.0, (S, S, N)) if use_fading else None
    psi = alloc.psi(U)
    grid, rates = channel.snapshot_rates(alloc, gain, RADIO, U, fading)
    want_rates = np.zeros(U)
    for s in range(S):
        for n in range(N):
            u = alloc.owner[s, n]
            if u < 0:
                assert grid[s, n] == 0.0
                continue
            I = _brute_interference(psi, alloc.power, gain, u, s, n, fading)
            assert channel.interference(u, s, n, alloc, gain, fading) == pytest.approx(I, rel=1e-12)
            h = gain[s, u] * (1.0 if fading is None else fading[s, s, n])
            want = alloc.power[s, n] * h / (I + RADIO.noise_power)
            assert grid[s, n] == pytest.approx(want, rel=1e-10)
            want_rates[u] += RADIO.subchannel_bw * math.log2(1 + want)
    np.testing.assert_allclose(rates, want_rates, rtol=1e-10)
    serving = np.full(U, 0)
    for u in range(U):
        held = np.argwhere(alloc.owner == u)
        if len(held):
            serving[u] = held[0, 0]
    for s in range(S):
        assert channel.ru_sum_rate(s, Association(serving), rates) == pytest.approx(
            want_rates[serving == s].sum())


def test_link_gains_shape_and_min_distance(topo7):
    pos = np.array([[0.0, 0.0], [3.0, 4.0], [250.0, 0.0]])
    g = channel.link_gains(topo7, pos, RADIO)
    assert g.shape == (7, 3)
    # both users inside 10 m of O-RU 0 see the clamped minimum distance
    assert g[0, 0] == g[0, 1]
    sh = np.full((7, 3), 6.0)
    assert np.allclose(channel.link_gains(topo7, pos, RADIO, sh), g * 10 ** -0.6)


@given(st.floats(-140, 40))
def test_dbm_round_trip(x):
    assert channel.watt_to_dbm(channel.dbm_to_watt(x)) == pytest.approx(x, abs=1e-9)
