"""Numba vs numpy timings for the hot kernels and a short end-to-end run.

    python benchmarks/bench_kernels.py [--repeat 200] [--steps 300]

Kernel timings call both implementations directly in one process; the
end-to-end figure re-launches the simulator with MMLBRA_BACKEND set.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from mmlbra import kernels


def _time(fn, args, repeat):
    fn(*args)  # compile / warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def kernel_cases(S, N, U, rng):
    owner = rng.integers(-1, U, (S, N))
    power = rng.choice([0.5, 1.25, 3.75, 5.0], (S, N))
    gain = 10 ** rng.uniform(-14, -9, (S, U))
    fading = rng.exponential(1.0, (S, S, N))
    sinr = rng.exponential(10.0, (S, N))
    rsrp = rng.uniform(-120, -60, (S, U))
    serving = rng.integers(0, S, U)
    off = rng.integers(-15, 16, S).astype(np.float64)
    hys = rng.integers(0, 16, S).astype(np.float64)
    counts = np.zeros((U, S), dtype=np.int64)
    return {
        "sinr_grid": (kernels._sinr_grid_loop, kernels._sinr_grid_numpy,
                      (owner, power, gain, fading, True, 1.4e-15)),
        "a3_tick": (kernels._a3_tick_loop, kernels._a3_tick_numpy,
                    (rsrp, serving, off, hys, counts, 3)),
        "user_rates": (kernels._user_rates_loop, kernels._user_rates_numpy,
                       (owner, sinr, U, 360e3)),
    }


def end_to_end(backend, steps):
    env = dict(os.environ, MMLBRA_BACKEND=backend)
    code = ("import time;from mmlbra.sim.config import preset;from mmlbra.sim.runner import run;"
            f"run(preset('desk',steps=5));t=time.perf_counter();run(preset('desk',steps={steps}));"
            "print(time.perf_counter()-t)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--steps", type=int, default=300)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':12s} {'S':>3s} {'U':>4s} {'numba us':>10s} {'numpy us':>10s} {'speedup':>8s}")
    for S, U in ((7, 80), (19, 240)):
        for name, (fast, ref, a) in kernel_cases(S, 80, U, rng).items():
            t_fast = _time(fast, a, args.repeat)
            t_ref = _time(ref, a, args.repeat)
            print(f"{name:12s} {S:3d} {U:4d} {t_fast * 1e6:10.1f} {t_ref * 1e6:10.1f} "
                  f"{t_ref / t_fast:7.1f}x")
    t_nb, t_np = end_to_end("numba", args.steps), end_to_end("numpy", args.steps)
    print(f"desk preset, {args.steps} steps: numba {t_nb:.2f}s  numpy {t_np:.2f}s  "
          f"({t_np / t_nb:.2f}x)")


if __name__ == "__main__":
    main()
