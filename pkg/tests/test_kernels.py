import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stabkit import kernels
from stabkit.exact import SHIFT_GRID, net_from_shift
from stabkit.model import IntervalSystem

needs_numba = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


def test_env_flag_forces_numpy_path():
    code = "from stabkit import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, STABKIT_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


@needs_numba
@given(st.lists(st.integers(0, 50), min_size=1, max_size=12), st.integers(1, 60),
       st.lists(st.integers(0, 10 ** 6), min_size=1, max_size=30))
def test_net_stats_backends_agree(vals, period, raw_shifts):
    hi = np.cumsum(vals)
    lo = hi - np.asarray(vals)
    shifts = np.asarray(raw_shifts) % period
    dem_a = np.arange(0, len(vals), 2)
    dem_b = np.minimum(dem_a + 2, len(vals))
    a = kernels.net_stats(lo, hi, period, shifts, dem_a, dem_b, backend="numpy")
    b = kernels.net_stats(lo, hi, period, shifts, dem_a, dem_b, backend="numba")
    assert np.array_equal(a[0], b[0]) and a[1] == b[1]


def test_net_stats_matches_exact_net():
    vals = [Fraction(1, 3), Fraction(1, 4), Fraction(1, 2), Fraction(1, 6), Fraction(2, 3)]
    sys_ = IntervalSystem(tuple((k, v, 1) for k, v in enumerate(vals)), ((0, 2), (2, 4)))
    eps = Fraction(1, 2)
    scale = 12 * SHIFT_GRID
    bounds = np.cumsum([int(v * scale) for v in vals])
    lo, hi = bounds - [int(v * scale) for v in vals], bounds
    period = int(eps * scale)
    js = [0, 1, SHIFT_GRID // 3, SHIFT_GRID - 1, 12345678]
    shifts = np.array(js, dtype=np.int64) * (period // SHIFT_GRID)
    for backend in ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else []):
        counts, bad = kernels.net_stats(lo, hi, period, shifts, [0, 2], [3, 5], backend=backend)
        expected = np.zeros(len(vals), dtype=np.int64)
        for j in js:
            for k in net_from_shift(sys_, eps, eps * Fraction(j, SHIFT_GRID)).chosen:
                expected[k] += 1
        assert np.array_equal(counts, expected)
        assert bad == 0


@needs_numba
def test_crossing_count_backends_agree():
    shifts = np.random.default_rng(1).random(10_000) * 5
    assert kernels.crossing_count(5, 7, 5, shifts, "numpy") == kernels.crossing_count(5, 7, 5, shifts, "numba")


def test_crossing_count_simple():
    shifts = np.array([0.5, 1.5, 2.5, 3.5, 4.5])
    # cuts at s + 5m land inside (5, 7) only for s in (0, 2)
    assert kernels.crossing_count(5.0, 7.0, 5.0, shifts, "numpy") == 2


def test_pair_min_small_and_inf_guard():
    c = np.array([1.0, 0.0])
    s = np.array([0.0, 0.5])
    q = np.array([1.0, np.inf])
    # (0, 1): 1 + 0 + s1*q0 + s0*q1 (= 0 by convention) = 1.5; (1, 1) is infinite
    v, a, b = kernels.pair_min(c, s, q, backend="numpy")
    assert (v, a, b) == (1.5, 0, 1)


@needs_numba
@given(st.integers(2, 30), st.integers(0, 10 ** 6))
def test_pair_min_backends_agree(n, seed):
    rng = np.random.default_rng(seed)
    c, s = rng.random(n), rng.random(n)
    s[rng.random(n) < 0.2] = 0.0
    q = 1.0 / (1.0 - np.linspace(0, 1, n, endpoint=False))
    ra = kernels.pair_min(c, s, q, backend="numpy")
    rb = kernels.pair_min(c, s, q, backend="numba")
    assert ra == rb
