"""Compiled vs pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Times the branch-cut quadrature behind E_{alpha,beta}(-x), the uniform
(Toeplitz) L1 stepper and the dense (graded-grid) L1 stepper on both
backends, checks that they agree, and prints the speed-up.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from fracinv import kernels
from fracinv.forward import TimeGrid, caputo_l1_weights


def cases():
    x = np.geomspace(1.0, 1.0e4, 2000)
    lam = (np.arange(1, 33) * np.pi) ** 2
    u0 = 1.0 / np.arange(1, 33) ** 2

    uniform = caputo_l1_weights(0.6, TimeGrid.uniform(1.0, 2048))
    graded = caputo_l1_weights(0.6, TimeGrid.graded(1.0, 1024, 2.5))
    # the size an inversion evaluates thousands of times
    small = caputo_l1_weights(0.6, TimeGrid.graded(1.0, 256, 2.5))
    return {
        "ml cut quadrature (2000 arguments)": lambda: kernels.ml_cut_integral(0.7, 0.9, x),
        "L1 uniform (32 modes, K=2048)": lambda: kernels.l1_solve_uniform(uniform.c, lam, u0),
        "L1 dense (32 modes, K=1024)": lambda: kernels.l1_solve_dense(graded.dense, lam, u0),
        "L1 dense (16 modes, K=256)": lambda: kernels.l1_solve_dense(small.dense, lam[:16], u0[:16]),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not kernels.compiled_available():
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    previous = kernels.backend()
    print(f"{'kernel':40s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speed-up':>9s} {'max diff':>10s}")
    try:
        for name, fn in cases().items():
            times, outputs = {}, {}
            for backend in ("python", "compiled"):
                kernels.set_backend(backend)
                outputs[backend] = fn()
                times[backend] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
            diff = float(np.max(np.abs(outputs["python"] - outputs["compiled"])))
            print(f"{name:40s} {1e3 * times['python']:12.2f} {1e3 * times['compiled']:14.2f} "
                  f"{times['python'] / times['compiled']:8.1f}x {diff:10.1e}")
    finally:
        kernels.set_backend(previous)


if __name__ == "__main__":
    main()
