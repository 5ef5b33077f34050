"""Compare the numba and numpy versions of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Reports the best-of-N wall time per kernel at sizes taken from a real
``E = 10, T = 60`` assembly, then the end-to-end solve time with each backend
(the backend is chosen at import, so that part runs in subprocesses).
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from localsyn import _accel
from localsyn.plant import FIG3_PARAMS
from localsyn.sl_maps import assemble_sl

SOLVE = ("import time; from localsyn.model_match import synthesize, SolverConfig; "
         "from localsyn.plant import FIG3_PARAMS as p; synthesize(p, 1, SolverConfig(10)); "
         "t = time.perf_counter(); synthesize(p, 10, SolverConfig(60)); print(time.perf_counter() - t)")


def best(fn, repeat):
    fn()  # warm-up (numba compiles on first call)
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _accel.numba_kernels is None:
        sys.exit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    blk = assemble_sl(FIG3_PARAMS, 10)["l"]
    V = blk.dense_V(0, blk.lag + blk.V.shape[2])
    T = 60
    row_len = V.shape[2] + T
    F = rng.standard_normal((V.shape[1], T + 1))
    a, b = rng.standard_normal((23, 62)), rng.standard_normal((5, 6))
    cases = {
        f"design_block V{V.shape} T={T}": lambda k: k.design_block(V, T, row_len),
        f"apply_block  V{V.shape} F{F.shape}": lambda k: k.apply_block(V, F, row_len),
        f"conv2d       {a.shape} * {b.shape}": lambda k: k.conv2d(a, b),
    }
    print(f"{'kernel':44s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for name, call in cases.items():
        t_np = best(lambda: call(_accel.numpy_kernels), args.repeat)
        t_nb = best(lambda: call(_accel.numba_kernels), args.repeat)
        print(f"{name:44s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.2f}")

    for label, flag in (("numpy", "1"), ("numba", "0")):
        env = dict(os.environ, LOCALSYN_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", SOLVE], env=env, capture_output=True, text=True, check=True)
        print(f"end-to-end solve E=10 T=60 ({label}): {float(out.stdout):.3f} s")


if __name__ == "__main__":
    main()
