"""Hot numeric loops used by Monte Carlo audits and threshold grid sweeps.

Every kernel has a pure-numpy implementation and a numba ``@njit`` twin.
The numba path is used when numba imports and ``STABKIT_NUMBA`` is not set
to ``0``; set ``STABKIT_NUMBA=0`` to force numpy.  Both paths return
identical results (integer kernels) or agree to rounding (float kernels).
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("STABKIT_NUMBA", "1") != "0"
BACKEND = "numba" if USE_NUMBA else "numpy"


# -- shifted-partition nets -----------------------------------------------------
# Inputs are int64 on a common integer scale: stacked segment ends lo/hi,
# cut period, one shift per draw, demanded point ranges [dem_a, dem_b).

def _net_stats_numpy(lo, hi, period, shifts, dem_a, dem_b):
    d = shifts[:, None]
    reach = hi[None, :] >= d
    last = d + np.where(reach, (hi[None, :] - d) // period, 0) * period
    sel = reach & (last >= lo[None, :])
    counts = sel.sum(axis=0).astype(np.int64)
    if len(dem_a) == 0:
        return counts, 0
    cs = np.zeros((sel.shape[0], sel.shape[1] + 1), dtype=np.int64)
    np.cumsum(sel, axis=1, out=cs[:, 1:])
    hit = (cs[:, dem_b] - cs[:, dem_a]) > 0
    return counts, int((~hit.all(axis=1)).sum())


def _crossing_count_numpy(lo, hi, period, shifts):
    first = shifts + (np.floor((lo - shifts) / period) + 1.0) * period
    return int(np.count_nonzero(first < hi))


def _pair_min_numpy(c, s, q):
    with np.errstate(invalid="ignore", over="ignore"):
        sq = np.where(s[:, None] == 0, 0.0, s[:, None] * q[None, :])
    # total[a, b] = c[a] + c[b] + s[b] q[a] + s[a] q[b]
    total = c[:, None] + c[None, :] + sq.T + sq
    k = int(np.argmin(total))
    a, b = divmod(k, total.shape[1])
    return float(total[a, b]), a, b


if HAVE_NUMBA:

    @njit(cache=True)
    def _net_stats_numba(lo, hi, period, shifts, dem_a, dem_b):
        n = lo.shape[0]
        counts = np.zeros(n, dtype=np.int64)
        sel = np.zeros(n, dtype=np.bool_)
        bad = 0
        for t in range(shifts.shape[0]):
            d = shifts[t]
            for k in range(n):
                ok = False
                if hi[k] >= d:
                    last = d + ((hi[k] - d) // period) * period
                    ok = last >= lo[k]
                sel[k] = ok
                if ok:
                    counts[k] += 1
            for r in range(dem_a.shape[0]):
                hit = False
                for k in range(dem_a[r], dem_b[r]):
                    if sel[k]:
                        hit = True
                        break
                if not hit:
                    bad += 1
                    break
        return counts, bad

    @njit(cache=True)
    def _crossing_count_numba(lo, hi, period, shifts):
        cnt = 0
        for t in range(shifts.shape[0]):
            s = shifts[t]
            first = s + (np.floor((lo - s) / period) + 1.0) * period
            if first < hi:
                cnt += 1
        return cnt

    @njit(cache=True)
    def _pair_min_numba(c, s, q):
        n = c.shape[0]
        best = np.inf
        ba = 0
        bb = 0
        for a in range(n):
            for b in range(n):
                t1 = 0.0 if s[b] == 0.0 else s[b] * q[a]
                t2 = 0.0 if s[a] == 0.0 else s[a] * q[b]
                v = c[a] + c[b] + t1 + t2
                if v < best:
                    best = v
                    ba = a
                    bb = b
        return best, ba, bb


def _as_i64(*arrs):
    return [np.ascontiguousarray(a, dtype=np.int64) for a in arrs]


def net_stats(lo, hi, period, shifts, dem_a, dem_b, backend=None):
    """Per-point selection counts and the number of draws leaving a demanded
    range unhit, over all shifts."""
    lo, hi, shifts, dem_a, dem_b = _as_i64(lo, hi, shifts, dem_a, dem_b)
    period = np.int64(period)
    if (backend or BACKEND) == "numba":
        counts, bad = _net_stats_numba(lo, hi, period, shifts, dem_a, dem_b)
        return counts, int(bad)
    return _net_stats_numpy(lo, hi, period, shifts, dem_a, dem_b)


def crossing_count(lo, hi, period, shifts, backend=None):
    """Number of shifts whose cut lattice ``s + m*period`` meets ``(lo, hi)``."""
    shifts = np.ascontiguousarray(shifts, dtype=np.float64)
    if (backend or BACKEND) == "numba":
        return int(_crossing_count_numba(float(lo), float(hi), float(period), shifts))
    return _crossing_count_numpy(float(lo), float(hi), float(period), shifts)


def pair_min(c, s, q, backend=None):
    """Minimum over index pairs of ``c[a] + c[b] + s[b]*q[a] + s[a]*q[b]``.

    ``s*q`` is taken as 0 when ``s`` is 0 (so ``q = inf`` is allowed).
    Returns ``(value, a, b)`` with the first minimiser in row-major order.
    """
    c, s, q = (np.ascontiguousarray(a, dtype=np.float64) for a in (c, s, q))
    if (backend or BACKEND) == "numba":
        v, a, b = _pair_min_numba(c, s, q)
        return float(v), int(a), int(b)
    return _pair_min_numpy(c, s, q)
