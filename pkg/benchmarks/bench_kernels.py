#!/usr/bin/env python3
"""Time the compiled stencil kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [n_cells] [repeats]
"""
import sys
import time

import numpy as np

from entropy_lab import _kernels


def bench(fn, args, repeats):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 4096
    repeats = int(sys.argv[2]) if len(sys.argv) > 2 else 200

    if _kernels.compiled_backend is None:
        print("compiled backend not built; run pip install -e . --no-build-isolation")
        return 1

    rng = np.random.default_rng(7)
    w = rng.normal(0.0, 0.8, n)
    lam_grid = np.linspace(-4.0, 4.0, 4097)
    tab_f = 0.5 * lam_grid**2
    tab_a = np.abs(lam_grid)
    x0, inv_dl = -4.0, 4096 / 8.0
    fplus = 0.5 * np.maximum(lam_grid, 0.0) ** 2
    fminus = -0.5 * np.minimum(lam_grid, 0.0) ** 2
    rho = 1.0 + 0.3 * rng.random(n)
    mom = rng.normal(0.0, 0.1, n)

    cases = [
        ("viscous_step", (w, 0.1, 0.02, tab_f, tab_a, x0, inv_dl)),
        ("eo_step", (w, 0.1, fplus, fminus, x0, inv_dl)),
        ("euler_step", (rho, mom, 0.05, 1.4)),
    ]
    print(f"n_cells={n} repeats={repeats}")
    print(f"{'kernel':14s} {'numpy [us]':>12s} {'compiled [us]':>14s} {'speedup':>8s} {'max|diff|':>12s}")
    for name, args in cases:
        f_np = getattr(_kernels.numpy_backend, name)
        f_c = getattr(_kernels.compiled_backend, name)
        t_np = bench(f_np, args, repeats)
        t_c = bench(f_c, args, repeats)
        a, b = f_np(*args), f_c(*args)
        if isinstance(a, tuple):
            diff = max(np.max(np.abs(x - y)) for x, y in zip(a, b))
        else:
            diff = np.max(np.abs(a - b))
        print(f"{name:14s} {t_np*1e6:12.1f} {t_c*1e6:14.1f} {t_np/t_c:8.2f} {diff:12.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
