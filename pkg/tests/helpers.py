"""Shared hypothesis strategies and small independent oracles."""
from fractions import Fraction
from itertools import combinations

from hypothesis import strategies as st

from stabkit.model import IntervalSystem


def frac(den: int, lo: int, hi: int):
    return st.integers(lo * den, hi * den).map(lambda k: Fraction(k, den))


@st.composite
def interval_systems(draw, max_points=8, max_intervals=6, unit_weights=False, coverable=True):
    pos = sorted(set(draw(st.lists(frac(4, 0, 8), min_size=1, max_size=max_points))))
    vals = [draw(frac(8, 0, 1)) for _ in pos]
    ws = [Fraction(1) if unit_weights else Fraction(draw(st.integers(1, 4))) for _ in pos]
    ivs = []
    for _ in range(draw(st.integers(0, max_intervals))):
        if coverable:
            p = pos[draw(st.integers(0, len(pos) - 1))]
            a = p - draw(frac(4, 0, 2))
            b = p + draw(frac(4, 0, 2))
        else:
            a = draw(frac(4, -1, 9))
            b = a + draw(frac(4, 0, 2))
        ivs.append((a, b))
    return IntervalSystem(tuple(zip(pos, vals, ws)), tuple(ivs))


def hitting_oracle(system, demand=None):
    """Cheapest hitting set by enumerating every point subset."""
    pos, w = system.positions, system.weights
    ivs = system.intervals if demand is None else [system.intervals[k] for k in demand]
    best = None
    for size in range(len(pos) + 1):
        for combo in combinations(range(len(pos)), size):
            if all(any(a <= pos[c] <= b for c in combo) for a, b in ivs):
                cost = sum((w[c] for c in combo), Fraction(0))
                if best is None or cost < best:
                    best = cost
    return best
