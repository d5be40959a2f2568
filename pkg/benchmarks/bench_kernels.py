"""Timing comparison of the numpy and numba kernel variants.

Run: python3 benchmarks/bench_kernels.py [--points N] [--centers M]
The numba variants JIT-compile on first call; a warmup run is excluded from
timing. Without numba installed only the numpy rows print.
"""

import argparse
import time

import numpy as np

from drmaj import _kernels as K


def _time(fn, *args, repeats=5):
    fn(*args)  # warmup / JIT
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--centers", type=int, default=500)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--pava-n", type=int, default=200_000)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    pts = rng.standard_normal((args.points, args.dim))
    cen = rng.standard_normal((args.centers, args.dim))
    h = np.full(args.dim, 0.3)
    noisy = np.sort(rng.standard_normal(args.pava_n))[::-1] + 0.05 * rng.standard_normal(
        args.pava_n
    )

    print(f"kde_eval: {args.points} points x {args.centers} centers, dim {args.dim}")
    t_np = _time(K.kde_eval_numpy, pts, cen, h)
    print(f"  numpy   {t_np * 1e3:9.1f} ms")
    if K.kde_eval_numba is not None:
        t_nb = _time(K.kde_eval_numba, pts, cen, h)
        print(f"  numba   {t_nb * 1e3:9.1f} ms   ({t_np / t_nb:.1f}x)")
        a = K.kde_eval_numpy(pts[:1000], cen, h)
        b = K.kde_eval_numba(pts[:1000], cen, h)
        print(f"  max rel diff: {np.max(np.abs(a - b) / a):.2e}")
    else:
        print("  numba unavailable")

    print(f"pava_nonincreasing: n = {args.pava_n}")
    t_np = _time(K.pava_nonincreasing_numpy, noisy)
    print(f"  numpy   {t_np * 1e3:9.1f} ms")
    if K.pava_nonincreasing_numba is not None:
        t_nb = _time(K.pava_nonincreasing_numba, noisy)
        print(f"  numba   {t_nb * 1e3:9.1f} ms   ({t_np / t_nb:.1f}x)")
        same = np.array_equal(
            K.pava_nonincreasing_numpy(noisy), K.pava_nonincreasing_numba(noisy)
        )
        print(f"  outputs identical: {same}")
    else:
        print("  numba unavailable")

    print(f"selected backend (DRMAJ_NUMBA): {'numba' if K.NUMBA_ACTIVE else 'numpy'}")


if __name__ == "__main__":
    main()
