"""Time the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--size M]

Both backends are imported directly, so the FTBALANCE_PURE switch does not
matter here. Each kernel is checked for agreement before it is timed.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from ftbalance import _kernels_py as pure

try:
    from ftbalance import _kernels as fast
except ImportError:
    fast = None


def cases(m: int, rng: np.random.Generator):
    sizes = rng.uniform(-0.1, 0.1, m)
    s0 = rng.uniform(-1.0, 1.0, m)
    s1 = s0 + rng.uniform(0.0, 0.2, m)
    speeds = 0.5 * (s0 + s1)
    fams = rng.integers(1, 3, m).astype(np.int64)
    costs = rng.uniform(0.0, 0.1, 18)
    masses = rng.uniform(0.0, 1.0, 18)
    budgets = (2.0 / 3.0) ** np.arange(13)
    return {
        "pair_integral": (0.3, -0.2, 0.4, 0.5, 0.1, -0.3),
        "pair_sum": (0.3, -0.2, 0.4, np.abs(sizes), s0, s1),
        "quadratic_full": (np.abs(sizes), s0, s1),
        "approaching_quadratic": (sizes, s0, s1, speeds),
        "linear_term": (fams, sizes, 2),
        "pareto_knapsack": (costs, masses, budgets),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=200, help="number of fronts")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    if fast is None:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':<24}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, call in cases(args.size, rng).items():
        f_py = getattr(pure, name)
        t_py = min(timeit.repeat(lambda: f_py(*call), number=1, repeat=args.repeat))
        if fast is None:
            print(f"{name:<24}{1e3 * t_py:>14.3f}{'-':>14}{'-':>10}")
            continue
        f_cy = getattr(fast, name)
        a, b = np.asarray(f_py(*call), dtype=float), np.asarray(f_cy(*call), dtype=float)
        if not np.allclose(a, b, rtol=1e-12, atol=1e-14):
            print(f"{name}: backends disagree ({a} vs {b})")
            return 1
        t_cy = min(timeit.repeat(lambda: f_cy(*call), number=1, repeat=args.repeat))
        print(f"{name:<24}{1e3 * t_py:>14.3f}{1e3 * t_cy:>14.3f}{t_py / max(t_cy, 1e-12):>10.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
