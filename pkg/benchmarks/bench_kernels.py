"""Compare the numba and numpy paths of the hot kernels.

Run: python benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from stabkit import kernels


def _time(fn, repeat: int) -> float:
    fn()  # warm-up (includes JIT compilation on the numba path)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(rng):
    n_pts, n_draws = 200, 20_000
    vals = rng.integers(1, 1 << 20, size=n_pts)
    hi = np.cumsum(vals)
    lo = hi - vals
    period = int(hi[-1] // 20)
    shifts = rng.integers(0, period, size=n_draws)
    dem_a = np.arange(0, n_pts - 10, 5)
    dem_b = dem_a + 10
    yield "net_stats", lambda be: kernels.net_stats(lo, hi, period, shifts, dem_a, dem_b, backend=be)

    sh = rng.random(1_000_000) * 5.0
    yield "crossing_count", lambda be: kernels.crossing_count(5.0, 7.0, 5.0, sh, backend=be)

    t = np.linspace(0.0, 1.0, 2001)
    c, s = 1.0 - t, t * t / 2
    with np.errstate(divide="ignore"):
        q = np.where(t < 1, 1.0 / (1.0 - t), np.inf)
    yield "pair_min", lambda be: kernels.pair_min(c, s, q, backend=be)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases(rng):
        results = [fn(b) for b in backends]
        if len(results) == 2:
            a, b = results
            same = all(np.array_equal(x, y) for x, y in zip(a, b)) if isinstance(a, tuple) else a == b
            assert same, f"{name}: backends disagree"
        times = [_time(lambda b=b: fn(b), args.repeat) for b in backends]
        speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) == 2 else ""
        print(f"{name:<16}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
