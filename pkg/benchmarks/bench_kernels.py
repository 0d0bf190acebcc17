"""Time the compiled and pure-numpy kernel backends side by side.

Runs the two hot kernels (resonance scans and grid binning) on shapes
taken from the default scan and oracle settings, times both backends,
and checks that their outputs agree bitwise. The numba path pays a
one-off compile cost, so each kernel is warmed up before timing.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats N] [--quick]

Setting PARATORUS_NO_NUMBA=1 removes the compiled path entirely; the
benchmark then reports numpy timings only. That flag is also the switch
for running the whole package without numba installed.
"""

import argparse
import time

import numpy as np

from paratorus.kernels import backend_name, cell_indices, resonance_hits

# (label, n points, n candidates, dimension) for the pairing scan and
# (label, n points, dimension, cells per axis) for the binning kernel.
RESONANCE_CASES = (
    ("scan  20000 x 1891", 20000, 1891, 2),
    ("scan  40000 x 3721", 40000, 3721, 2),
)
CELL_CASES = (
    ("bins 200000 d=2 m=100", 200000, 2, 100),
    ("bins 200000 d=4 m=25", 200000, 4, 25),
)


def _timed(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def _row(label, numpy_s, numba_s):
    if numba_s is None:
        return f"{label:<24} {numpy_s * 1000:>10.1f} ms {'-':>12} {'-':>8}"
    speedup = numpy_s / numba_s if numba_s > 0 else float("inf")
    return (
        f"{label:<24} {numpy_s * 1000:>10.1f} ms "
        f"{numba_s * 1000:>9.1f} ms {speedup:>7.1f}x"
    )


def main():
    parser = argparse.ArgumentParser(
        description="benchmark the kernel backends against each other"
    )
    parser.add_argument(
        "--repeats", type=int, default=5, help="timed runs per case, best kept"
    )
    parser.add_argument(
        "--quick", action="store_true", help="first case of each kernel only"
    )
    args = parser.parse_args()

    with_numba = backend_name() == "numba"
    print(f"default backend: {backend_name()}")
    if not with_numba:
        print("compiled path unavailable (flag set or numba missing); "
              "timing numpy only")
    print(f"{'case':<24} {'numpy':>13} {'numba':>12} {'speedup':>8}")

    rng = np.random.default_rng(7)
    resonance = RESONANCE_CASES[:1] if args.quick else RESONANCE_CASES
    cells = CELL_CASES[:1] if args.quick else CELL_CASES

    for label, n, k, d in resonance:
        points = rng.random((n, d))
        candidates = rng.integers(-30, 31, size=(k, d)).astype(np.float64)
        run_numpy = lambda: resonance_hits(points, candidates, 1e-9, backend="numpy")
        numba_s = None
        if with_numba:
            run_numba = lambda: resonance_hits(points, candidates, 1e-9, backend="numba")
            run_numba()  # compile before timing
            numba_s, got = _timed(run_numba, args.repeats)
        numpy_s, want = _timed(run_numpy, args.repeats)
        if with_numba:
            assert np.array_equal(want[0], got[0])
            assert np.array_equal(want[1], got[1])
        print(_row(label, numpy_s, numba_s))

    for label, n, d, m in cells:
        points = rng.random((n, d))
        run_numpy = lambda: cell_indices(points, m, backend="numpy")
        numba_s = None
        if with_numba:
            run_numba = lambda: cell_indices(points, m, backend="numba")
            run_numba()
            numba_s, got = _timed(run_numba, args.repeats)
        numpy_s, want = _timed(run_numpy, args.repeats)
        if with_numba:
            assert np.array_equal(want, got)
        print(_row(label, numpy_s, numba_s))

    print("backends agree bitwise on every case" if with_numba
          else "single backend, nothing to cross-check")


if __name__ == "__main__":
    main()
