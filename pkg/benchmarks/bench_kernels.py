"""Compare the compiled and pure-Python Numerov kernels.

Runs one shooting pass of the harmonic oscillator at E = 4 (between the
second and third levels, so two nodes) at several grid sizes
through both backends, checks that they agree, and prints timings.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from stokes_wkb import kernels


def harmonic_grid(n: int, energy: float = 4.0, lam: float = 1.0, half_width: float = 8.0):
    x = np.linspace(-half_width, half_width, n)
    return lam * lam * (x * x - energy), x[1] - x[0]


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled kernel unavailable; timing the Python kernel only")
    print(f"{'points':>9} {'python_s':>12} {'cython_s':>12} {'speedup':>9} {'nodes':>6}")
    for n in (1_000, 10_000, 100_000, 1_000_000):
        f, h = harmonic_grid(n)
        py = kernels.numerov_shoot(f, h, 0, n - 1, 0.0, 1e-12, backend="python")
        t_py = best_time(lambda: kernels.numerov_shoot(f, h, 0, n - 1, 0.0, 1e-12, backend="python"), args.repeat)
        if kernels.BACKEND == "cython":
            cy = kernels.numerov_shoot(f, h, 0, n - 1, 0.0, 1e-12, backend="cython")
            if cy[2] != py[2]:
                raise SystemExit(f"node counts differ at n={n}: {cy[2]} vs {py[2]}")
            t_cy = best_time(lambda: kernels.numerov_shoot(f, h, 0, n - 1, 0.0, 1e-12, backend="cython"),
                             args.repeat)
            print(f"{n:>9} {t_py:>12.6f} {t_cy:>12.6f} {t_py / t_cy:>8.1f}x {py[2]:>6}")
        else:
            print(f"{n:>9} {t_py:>12.6f} {'-':>12} {'-':>9} {py[2]:>6}")


if __name__ == "__main__":
    main()
