"""Exact one-orientation solvers, epsilon-nets, net-size profiles and the
brute-force stabbing oracle."""
from __future__ import annotations

import csv
import io
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import CapExceededError, UncoverableError
from .model import Instance, IntervalSystem, StabSolution, maximal_cliques

# net draws use delta = eps * j / SHIFT_GRID with integer j
SHIFT_GRID = 1 << 32


# -- interval hitting -------------------------------------------------------------

def min_weight_hitting(system: IntervalSystem, demand=None) -> StabSolution:
    """Minimum-weight point set hitting every interval (or every interval in
    ``demand``), by dynamic programming over points in position order.

    ``chosen`` holds point indices; ``witness[k]`` is the chosen point inside
    the ``k``-th demanded interval.
    """
    spans = system.spans()
    idx = range(len(spans)) if demand is None else list(demand)
    req = []
    for k in idx:
        a, b = spans[k]
        if a >= b:
            raise UncoverableError(f"interval {k} {system.intervals[k]} contains no point")
        req.append((a, b - 1))
    n = len(system.points)
    w = system.weights
    if not req:
        return StabSolution((), Fraction(0), ())

    # need_left[j]: largest left index among intervals ending strictly before j
    by_right = sorted(req, key=lambda ab: ab[1])
    need_left = [-1] * (n + 1)
    best = -1
    p = 0
    for j in range(n + 1):
        while p < len(by_right) and by_right[p][1] < j:
            best = max(best, by_right[p][0])
            p += 1
        need_left[j] = best

    INF = None
    dp = [INF] * n
    prev = [-1] * n
    for j in range(n):
        lo = need_left[j]
        if lo < 0:
            dp[j] = w[j]
            prev[j] = -1
            continue
        cand = None
        arg = -1
        for i in range(lo, j):
            if dp[i] is not None and (cand is None or dp[i] < cand):
                cand, arg = dp[i], i
        if cand is not None:
            dp[j] = cand + w[j]
            prev[j] = arg
    last_needed = max(a for a, _ in req)
    end, val = -1, None
    for j in range(last_needed, n):
        if dp[j] is not None and (val is None or dp[j] < val):
            end, val = j, dp[j]
    chosen = []
    while end >= 0:
        chosen.append(end)
        end = prev[end]
    chosen.reverse()
    witness = []
    for a, b in req:
        witness.append(next(c for c in chosen if a <= c <= b))
    return StabSolution(tuple(chosen), val, tuple(witness))


def _demand(system: IntervalSystem, eps: Fraction) -> list:
    """Intervals an ``eps``-net must hit; zero-mass intervals are never demanded."""
    return [k for k, m in enumerate(system.masses()) if m >= eps and m > 0]


def optimal_net(system: IntervalSystem, eps) -> StabSolution:
    """Minimum-weight ``eps``-net: hit every interval with ``x(I) >= eps``."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    sol = min_weight_hitting(system, _demand(system, eps))
    bound = system.weighted_value() / eps
    assert sol.weight <= bound, (sol.weight, bound)
    return StabSolution(sol.chosen, sol.weight, sol.witness, {"eps": eps, "bound": bound})


def threshold_net(system: IntervalSystem, tau) -> StabSolution:
    """Like :func:`optimal_net` but accepting ``tau = 0`` (demand = positive-mass intervals)."""
    return min_weight_hitting(system, _demand(system, Fraction(tau)))


# -- shifted partitions and random nets ---------------------------------------

@dataclass(frozen=True)
class ShiftedPartition:
    """Cuts at ``shift + m * period`` inside the host segment ``[0, length]``."""

    period: Fraction
    shift: Fraction
    length: Fraction

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("period must be positive")
        if not 0 <= self.shift < self.period:
            raise ValueError("shift must lie in [0, period)")

    def cuts(self) -> list:
        out = []
        c = Fraction(self.shift)
        while c <= self.length:
            out.append(c)
            c += self.period
        return out


def crossings(partition: ShiftedPartition, interval) -> bool:
    """True iff a cut lies strictly inside the interval."""
    lo, hi = Fraction(interval[0]), Fraction(interval[1])
    if hi <= lo:
        return False
    p, s = partition.period, partition.shift
    # smallest cut strictly greater than lo
    m = (lo - s) // p + 1
    c = s + m * p
    return c < hi and 0 <= c <= partition.length


def stacked_bounds(values) -> list:
    """Consecutive segments of lengths ``values`` laid end to end from 0."""
    out, acc = [], Fraction(0)
    for v in values:
        out.append((acc, acc + v))
        acc += v
    return out


def net_from_shift(system: IntervalSystem, eps, delta) -> StabSolution:
    """Points whose closed stacked segment contains a cut ``delta + m*eps``."""
    eps, delta = Fraction(eps), Fraction(delta)
    chosen = []
    for k, (lo, hi) in enumerate(stacked_bounds(system.values)):
        if hi < delta:
            continue
        m = (hi - delta) // eps
        if delta + m * eps >= lo:
            chosen.append(k)
    w = system.weights
    weight = sum((w[k] for k in chosen), Fraction(0))
    spans = system.spans()
    witness = []
    for k in _demand(system, eps):
        a, b = spans[k]
        witness.append(next((c for c in chosen if a <= c < b), None))
    return StabSolution(tuple(chosen), weight, tuple(witness), {"eps": eps, "delta": delta})


def draw_shift_index(seed) -> int:
    return int(np.random.default_rng(seed).integers(0, SHIFT_GRID, dtype=np.uint64))


def random_net(system: IntervalSystem, eps, seed) -> StabSolution:
    """Randomly shifted partition net; always a valid ``eps``-net.

    The shift is ``eps * j / 2**32`` with ``j`` drawn uniformly from the seed,
    so selection probability is ``x_v / eps`` up to the grid resolution.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    j = draw_shift_index(seed)
    sol = net_from_shift(system, eps, eps * Fraction(j, SHIFT_GRID))
    assert all(c is not None for c in sol.witness)
    return sol


# -- psi profile ---------------------------------------------------------------------

@dataclass(frozen=True)
class NetProfile:
    """Step function tau -> optimal tau-net weight on (0, 1].

    ``values[i]`` is the net weight on ``(breakpoints[i], breakpoints[i+1]]``.
    """

    breakpoints: tuple
    values: tuple
    psi_bar: Fraction

    def psi(self, tau) -> Fraction:
        tau = Fraction(tau)
        for i, v in enumerate(self.values):
            if self.breakpoints[i] < tau <= self.breakpoints[i + 1]:
                return v
        if tau <= self.breakpoints[0]:
            return self.values[0] if self.values else Fraction(0)
        return Fraction(0)

    def drop_thresholds(self) -> list:
        """``tau_l`` = infimum of tau with psi(tau) < l, for l = 1..max psi."""
        top = max(self.values, default=Fraction(0))
        out = []
        for level in range(1, int(top) + 1):
            t = Fraction(1)
            for i, v in enumerate(self.values):
                if v < level:
                    t = self.breakpoints[i]
                    break
            out.append(t)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["threshold", "value"])
        for b, v in zip(self.breakpoints[1:], self.values):
            wr.writerow([str(b), str(v)])
        return buf.getvalue()


def psi_profile(system: IntervalSystem) -> NetProfile:
    """Exact optimal-net weight as a function of tau in [0, 1] and its integral."""
    masses = system.masses()
    bps = sorted({Fraction(0), Fraction(1)} | {m for m in masses if 0 < m < 1})
    values = []
    total = Fraction(0)
    for a, b in zip(bps, bps[1:]):
        v = threshold_net(system, b).weight
        values.append(v)
        total += (b - a) * v
    return NetProfile(tuple(bps), tuple(values), total)


def independent_layer_bound(system: IntervalSystem) -> Fraction:
    """Sum over l of the best min-mass among l pairwise-disjoint intervals."""
    masses = system.masses()
    ivs = system.intervals
    n = len(ivs)
    order = sorted(range(n), key=lambda k: ivs[k])
    best: dict = {}

    def extend(start, chosen, last_hi, cur_min):
        for pos in range(start, n):
            k = order[pos]
            lo, hi = ivs[k]
            if last_hi is not None and lo <= last_hi:
                continue
            m = masses[k] if cur_min is None else min(cur_min, masses[k])
            size = len(chosen) + 1
            if m > best.get(size, Fraction(-1)):
                best[size] = m
            extend(pos + 1, chosen + [k], hi, m)

    extend(0, [], None, None)
    return sum((min(v, Fraction(1)) for v in best.values()), Fraction(0))


def continuity_check(system: IntervalSystem) -> bool:
    """True iff every maximal clique of intervals contains a point."""
    pos = system.positions
    for _, lo, hi in maximal_cliques(system.intervals):
        k = bisect_left(pos, lo)
        if k >= len(pos) or pos[k] > hi:
            return False
    return True


# -- brute force oracle -------------------------------------------------------------

DEFAULT_CAP = 26


def _masks(instance: Instance):
    refs = instance.line_refs()
    col = {r: k for k, r in enumerate(refs)}
    masks = [0] * len(refs)
    for i in range(len(instance.rects)):
        for s in instance.stabbers(i):
            masks[col[s]] |= 1 << i
    return refs, masks


def _solution(instance: Instance, refs, picked) -> StabSolution:
    chosen = tuple(refs[k] for k in sorted(picked))
    witness = []
    cs = set(chosen)
    for i in range(len(instance.rects)):
        witness.append(next(s for s in instance.stabbers(i) if s in cs))
    return StabSolution(chosen, instance.weight_of(chosen), tuple(witness))


def brute_force_opt(instance: Instance, budget_limit: int = DEFAULT_CAP) -> StabSolution:
    """Exact minimum-weight stabbing set by branch and bound.

    Branches on the uncovered rectangle with the fewest stabbing lines.
    Among optimal sets found, the one with lexicographically smallest sorted
    line-index tuple wins.
    """
    n = instance.n_lines
    if n > budget_limit:
        raise CapExceededError(
            f"{n} candidate lines exceed the brute-force cap of {budget_limit}; shrink the instance")
    refs, masks = _masks(instance)
    weights = [instance.line(r).weight for r in refs]
    n_rects = len(instance.rects)
    full = (1 << n_rects) - 1
    col = {r: k for k, r in enumerate(refs)}
    stab_cols = [tuple(col[s] for s in instance.stabbers(i)) for i in range(n_rects)]

    best = [None, None]  # weight, sorted column tuple

    def rec(covered, banned, cost, picked):
        if best[0] is not None and cost > best[0]:
            return
        if covered == full:
            key = tuple(sorted(picked))
            if best[0] is None or (cost, key) < (best[0], best[1]):
                best[0], best[1] = cost, key
            return
        # fail-first: uncovered rect with the fewest still-allowed stabbers
        target, options = -1, None
        rest = full & ~covered
        while rest:
            low = rest & -rest
            i = low.bit_length() - 1
            rest ^= low
            opts = [k for k in stab_cols[i] if not banned >> k & 1]
            if options is None or len(opts) < len(options):
                target, options = i, opts
                if len(opts) <= 1:
                    break
        if not options:
            return
        for k in options:
            picked.append(k)
            rec(covered | masks[k], banned, cost + weights[k], picked)
            picked.pop()
            # later branches exclude k, so every subset is visited once
            banned |= 1 << k

    rec(0, 0, Fraction(0), [])
    return _solution(instance, refs, best[1])


def exhaustive_opt(instance: Instance, budget_limit: int = 20) -> StabSolution:
    """Unpruned enumeration of every line subset (cross-check oracle)."""
    n = instance.n_lines
    if n > budget_limit:
        raise CapExceededError(f"{n} lines exceed the exhaustive cap of {budget_limit}")
    refs, masks = _masks(instance)
    weights = [instance.line(r).weight for r in refs]
    full = (1 << len(instance.rects)) - 1
    best = None
    for size in range(n + 1):
        for combo in combinations(range(n), size):
            cov = 0
            for k in combo:
                cov |= masks[k]
            if cov != full:
                continue
            w = sum((weights[k] for k in combo), Fraction(0))
            if best is None or (w, combo) < best:
                best = (w, combo)
    return _solution(instance, refs, best[1])
