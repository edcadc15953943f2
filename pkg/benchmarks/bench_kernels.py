#!/usr/bin/env python3
"""Time each kernel under the numba and numpy backends.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--scale K]
"""
import argparse
import timeit

import numpy as np

from nimbus import _kernels as K


def cases(scale, rng):
    px = rng.integers(0, 256, (int(500 * scale), 2000, 3), dtype=np.uint8)
    w = np.array([0.2126, 0.7152, 0.0722])
    n = int(20000 * scale)
    times = np.sort(rng.uniform(0, 86400 * 30, n))
    starts = np.sort(rng.uniform(0, 86400 * 30, 200))
    ends = starts + rng.uniform(0, 3600, starts.size)
    gauge = np.arange(0, 86400 * 30, 60.0)
    values = np.sort(rng.uniform(0, 1.5, n))
    grid = np.round(np.arange(0.01, 0.2001, 0.01), 12)
    return {
        "weighted_mean": (px, w),
        "in_any_interval": (times, starts, ends),
        "nearest_within": (times, gauge, 90.0),
        "count_below": (values, grid),
        "signed_distance": (times, starts, ends),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply input sizes")
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, inputs in cases(args.scale, rng).items():
        fast = getattr(K, f"{name}_numba")
        slow = getattr(K, f"{name}_numpy")
        fast(*inputs)  # compile outside the timed region
        t_fast = min(timeit.repeat(lambda: fast(*inputs), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*inputs), number=1, repeat=args.repeat))
        print(f"{name:<18}{1e3 * t_fast:>12.3f}{1e3 * t_slow:>12.3f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
