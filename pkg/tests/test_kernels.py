import os
import subprocess
import sys

import numpy as np
from hypothesis import given, strategies as st

from mmlbra import _jit, kernels

seeds = st.integers(0, 2 ** 32 - 1)


def _alloc(rng, S, U, N):
    owner = np.where(rng.random((S, N)) < 0.6, rng.integers(0, U, (S, N)), -1)
    power = np.where(owner >= 0, rng.choice([0.0, 0.5, 1.25, 3.75, 5.0], (S, N)), 0.0)
    return owner, power


@given(seeds, st.sampled_from([1, 3, 7]), st.integers(1, 30), st.integers(1, 12), st.booleans())
def test_sinr_grid_backends_agree(seed, S, U, N, use_fading):
    rng = np.random.default_rng(seed)
    owner, power = _alloc(rng, S, U, N)
    gain = 10 ** rng.uniform(-14, -8, (S, U))
    fading = rng.exponential(1.0, (S, S, N)) if use_fading else np.ones((1, 1, 1))
    a = kernels._sinr_grid_loop(owner, power, gain, fading, use_fading, 1.4e-15)
    b = kernels._sinr_grid_numpy(owner, power, gain, fading, use_fading, 1.4e-15)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=0)


@given(seeds, st.sampled_from([2, 3, 7]), st.integers(1, 30), st.integers(1, 4))
def test_a3_tick_backends_agree(seed, S, U, need):
    rng = np.random.default_rng(seed)
    serving = rng.integers(-1, S, U)
    off = rng.integers(-15, 16, S).astype(float)
    hys = rng.integers(0, 16, S).astype(float)
    ca = rng.integers(0, need + 1, (U, S))
    cb = ca.copy()
    for _ in range(4):
        rsrp = rng.uniform(-110, -60, (S, U)).round(0)
        ba = kernels._a3_tick_loop(rsrp, serving, off, hys, ca, need)
        bb = kernels._a3_tick_numpy(rsrp, serving, off, hys, cb, need)
        assert ba.tolist() == bb.tolist()
        assert ca.tolist() == cb.tolist()


@given(seeds, st.integers(1, 7), st.integers(1, 30), st.integers(1, 12))
def test_user_rates_backends_agree(seed, S, U, N):
    rng = np.random.default_rng(seed)
    owner, _ = _alloc(rng, S, U, N)
    sinr = rng.exponential(50.0, (S, N))
    a = kernels._user_rates_loop(owner, sinr, U, 360e3)
    b = kernels._user_rates_numpy(owner, sinr, U, 360e3)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_backend_flag_selects_numpy():
    env = dict(os.environ, MMLBRA_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", "from mmlbra import _jit; print(_jit.backend_name())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    assert _jit.backend_name() in ("numba", "numpy")


def test_backends_give_same_run_summary():
    code = ("from mmlbra.sim.config import preset; from mmlbra.sim.runner import run;"
            "s = run(preset('desk', steps=150, seed=4)).summary(); print(repr(s))")
    outs = []
    for backend in ("numba", "numpy"):
        env = dict(os.environ, MMLBRA_BACKEND=backend)
        r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                           check=True)
        outs.append(eval(r.stdout))
    for k in outs[0]:
        assert np.isclose(outs[0][k], outs[1][k], rtol=1e-9), k
