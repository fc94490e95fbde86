"""Certification of the rounding analyses.

Covers the expected per-line charge of segment-stabbing rounding (closed
form and quadrature), the limitation density for that analysis, dual
certificates for the unit-interval net bounds, and the level recurrence
behind the dual lower-bound family.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import networkx as nx
import numpy as np
import sympy
from scipy import integrate, optimize

from . import kernels
from .lp import EQ, GE, LinearProgram, solve
from .model import maximal_cliques
from .rounding import DEFAULT_SCHEDULE, ThresholdSchedule

SEGSTAB_BOUND = 1.935


# -- expected charge mu ----------------------------------------------------------

@dataclass(frozen=True)
class MuParams:
    """Constants of the per-case antiderivatives of the expected charge."""

    alpha: float
    beta: float
    gamma: float
    A1: float
    B1: float
    C1: float
    D1: float
    z0: float
    A2: float
    B2: float
    C2: float
    A3: float
    B3: float
    C3: float

    @property
    def width2(self) -> float:
        return (self.beta - self.alpha) ** 2


def stationarity(z: float, alpha: float, beta: float) -> float:
    """Derivative factor of mu_bar on [alpha, beta]; its root is the maximiser."""
    return 1.0 / z - (1.0 - z) / (1.0 - beta) ** 2 - (z - alpha) / (2.0 * z * z)


def mu_params(schedule: ThresholdSchedule = DEFAULT_SCHEDULE) -> MuParams:
    a, b = float(schedule.alpha), float(schedule.beta)
    g = float(schedule.gamma_thr)
    w2 = (b - a) ** 2
    k = (1 - b) ** 2 * w2
    A1 = -1.0 / k
    B1 = (1 + a) / k
    C1 = -1.0 / w2 - a / k
    D1 = (1 - a) / w2
    z0 = optimize.brentq(stationarity, a, b, args=(a, b), xtol=1e-15, rtol=4 * np.finfo(float).eps)
    A2, B2, C2 = _branch2_coeffs(z0, a, b)
    A3, B3, C3 = _branch2_coeffs(b, a, b)
    return MuParams(a, b, g, A1, B1, C1, D1, z0, A2, B2, C2, A3, B3, C3)


def _branch2_coeffs(z, a, b):
    w2 = (b - a) ** 2
    return 1.0 / (z * w2), -a / (z * w2) - 1.0 / w2, (1 - a) / w2


def mu(z: float, tau: float, params: MuParams | None = None) -> float:
    """Expected charge factor of a line with LP value ``z`` given first threshold ``tau``."""
    p = params or MU_PARAMS
    b = p.beta
    tau2 = 1.0 - (1.0 - b) ** 2 / (1.0 - tau)
    if z < tau:
        return 0.5 * (1.0 / (1.0 - tau) + 1.0 / (1.0 - tau2))
    if z == 0.0:
        return math.inf
    if z < tau2:
        return 0.5 * (1.0 / z + 1.0 / (1.0 - tau))
    return 1.0 / z


def _G1(t, p):
    return p.A1 * t ** 3 / 3 + p.B1 * t ** 2 / 2 + p.C1 * t - p.D1 * math.log(1 - t)


def _G2(t, z, p):
    A, B, C = _branch2_coeffs(z, p.alpha, p.beta)
    return A * t ** 2 / 2 + B * t - C * math.log(1 - t)


def _G3(t, z, p):
    return (t - p.alpha) ** 2 / (z * p.width2)


def _split_point(z: float, p: MuParams) -> float | None:
    if p.alpha < z < p.beta:
        return z
    if p.beta < z < p.gamma:
        return 1.0 - (1.0 - p.beta) ** 2 / (1.0 - z)
    return None


def _mu_bar_closed(z: float, p: MuParams) -> float:
    a, b, g = p.alpha, p.beta, p.gamma
    if z <= a:
        return _G1(b, p) - _G1(a, p)
    if z <= b:
        return (_G2(z, z, p) - _G2(a, z, p)) + (_G1(b, p) - _G1(z, p))
    if z <= g:
        w = 1.0 - (1.0 - b) ** 2 / (1.0 - z)
        return (_G2(w, z, p) - _G2(a, z, p)) + (_G3(b, z, p) - _G3(w, z, p))
    return 1.0 / z


def _mu_bar_quad(z: float, p: MuParams) -> float:
    a, b = p.alpha, p.beta

    def integrand(t):
        return mu(z, t, p) * 2.0 * (t - a) / p.width2

    split = _split_point(z, p)
    pieces = [a, b] if split is None else [a, split, b]
    total = 0.0
    for lo, hi in zip(pieces, pieces[1:]):
        # integrate each smooth piece separately; the branch jump sits at the split
        val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-13, limit=200)
        total += val
    return total


def mu_bar(z: float, params: MuParams | None = None, method: str = "closed_form") -> float:
    """Expected charge factor averaged over the threshold distribution."""
    p = params or MU_PARAMS
    if not 0.0 <= z <= 1.0:
        raise ValueError("z must lie in [0, 1]")
    if method == "closed_form":
        return _mu_bar_closed(z, p)
    if method == "quadrature":
        return _mu_bar_quad(z, p)
    raise ValueError(f"unknown method {method!r}")


def golden_max(fn, lo: float, hi: float, tol: float = 1e-12) -> tuple[float, float]:
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    z = (a + b) / 2
    return z, fn(z)


def mu_bar_max(params: MuParams | None = None, grid_step: float = 1e-3) -> tuple[float, float]:
    """Grid scan plus golden-section refinement of max_z mu_bar(z)."""
    if grid_step > 1e-3:
        raise ValueError("grid_step must be at most 1e-3")
    p = params or MU_PARAMS
    n = int(round(1.0 / grid_step))
    zs = np.linspace(0.0, 1.0, n + 1)
    vals = np.array([_mu_bar_closed(z, p) for z in zs])
    i = int(np.argmax(vals))
    lo, hi = zs[max(i - 1, 0)], zs[min(i + 1, n)]
    z, v = golden_max(lambda t: _mu_bar_closed(t, p), lo, hi)
    if vals[i] > v:
        z, v = float(zs[i]), float(vals[i])
    assert v < SEGSTAB_BOUND, v
    return z, v


def case3_slope(w: float, params: MuParams | None = None) -> float:
    """d/dw of mu_bar(h(w)) for w in [alpha, beta] (positive means mu_bar
    grows as z decreases towards beta)."""
    p = params or MU_PARAMS
    a, b = p.alpha, p.beta
    h = 1.0 - (1.0 - b) ** 2 / (1.0 - w)
    dh = -((1.0 - b) ** 2) / (1.0 - w) ** 2
    rho = 2.0 * (w - a) / p.width2
    return (1.0 / (1.0 - w) - 1.0 / h + dh * (w - a) / (2.0 * h * h)) * rho - 2.0 * dh / (h * h)


def mu_bar_curve(n: int = 1001, params: MuParams | None = None) -> list:
    p = params or MU_PARAMS
    return [(float(z), _mu_bar_closed(float(z), p)) for z in np.linspace(0.0, 1.0, n)]


MU_PARAMS = mu_params()


# -- limitation density ---------------------------------------------------------------
# (lo, hi, slope, intercept) pieces of the density f; zero elsewhere.
F_PIECES = (
    (Fraction(0), Fraction(1, 5), Fraction(0), Fraction(1, 2)),
    (Fraction(1, 5), Fraction(2, 5), Fraction(75, 4), Fraction(-13, 4)),
    (Fraction(2, 5), Fraction(1, 2), Fraction(0), Fraction(17, 4)),
)


def limitation_density(t):
    for lo, hi, s, c in F_PIECES:
        if lo < t < hi or (t == lo and lo > 0):
            return s * t + c
    return 0 * t


def _cum(t, moment: int):
    """Integral of s**moment * f(s) over [0, t]."""
    total = 0 * t
    for lo, hi, s, c in F_PIECES:
        if t <= lo:
            break
        u = min(t, hi) if isinstance(t, Fraction) else min(t, float(hi))
        lo_ = lo if isinstance(t, Fraction) else float(lo)
        s_ = s if isinstance(t, Fraction) else float(s)
        c_ = c if isinstance(t, Fraction) else float(c)
        if moment == 0:
            total += s_ * (u * u - lo_ * lo_) / 2 + c_ * (u - lo_)
        else:
            total += s_ * (u ** 3 - lo_ ** 3) / 3 + c_ * (u * u - lo_ * lo_) / 2
    return total


def density_mass(t=Fraction(1)):
    return _cum(t, 0)


def density_moment(t=Fraction(1)):
    return _cum(t, 1)


def _cum_array(t: np.ndarray, moment: int) -> np.ndarray:
    out = np.zeros_like(t, dtype=np.float64)
    for lo, hi, s, c in F_PIECES:
        lo_, hi_, s_, c_ = float(lo), float(hi), float(s), float(c)
        u = np.clip(t, lo_, hi_)
        if moment == 0:
            out += s_ * (u * u - lo_ * lo_) / 2 + c_ * (u - lo_)
        else:
            out += s_ * (u ** 3 - lo_ ** 3) / 3 + c_ * (u * u - lo_ * lo_) / 2
    return out


def limitation_gamma(tx, ty):
    """Ratio of rounded weight to LP value for the limitation density.

    Exact for Fraction inputs.  A zero denominator with positive numerator
    yields ``math.inf``.
    """
    exact = isinstance(tx, Fraction) and isinstance(ty, Fraction)
    one = Fraction(1) if exact else 1.0
    if not exact:
        tx, ty = float(tx), float(ty)
    m = density_moment(one)
    mass = density_mass(one)

    def div(num, den):
        if den == 0:
            return 0 * num if num == 0 else math.inf
        return num / den

    tail = (mass - density_mass(tx)) + (mass - density_mass(ty))
    val = tail + div(density_moment(ty), one - tx) + div(density_moment(tx), one - ty)
    return val / (2 * m) if val != math.inf else math.inf


def limitation_grid_min(n: int = 2001, backend=None) -> tuple[float, float, float]:
    """Minimum of :func:`limitation_gamma` over an ``n x n`` grid of [0, 1]^2.

    Returns ``(value, tx, ty)``.
    """
    t = np.linspace(0.0, 1.0, n)
    m = float(density_moment())
    c = (1.0 - _cum_array(t, 0)) / (2 * m)
    s = _cum_array(t, 1) / (2 * m)
    with np.errstate(divide="ignore"):
        q = np.where(t < 1.0, 1.0 / (1.0 - t), np.inf)
    v, a, b = kernels.pair_min(c, s, q, backend=backend)
    return v, float(t[a]), float(t[b])


def limitation_curve(n: int = 101) -> list:
    t = np.linspace(0.0, 1.0, n)
    return [(float(a), float(b), float(limitation_gamma(float(a), float(b)))) for a in t for b in t]


# -- dual certificates -----------------------------------------------------------------

def _frac_map(beta) -> dict:
    if isinstance(beta, Mapping):
        return {int(k): Fraction(v) for k, v in beta.items()}
    return {j + 1: Fraction(v) for j, v in enumerate(beta)}


@dataclass(frozen=True)
class DualFamily:
    """Per-level pairwise-disjoint intervals with dual weights summing to 1."""

    levels: tuple
    betas: tuple

    def __post_init__(self):
        levels = tuple(tuple((Fraction(lo), Fraction(hi)) for lo, hi in lvl) for lvl in self.levels)
        betas = tuple(tuple(Fraction(b) for b in lvl) for lvl in self.betas)
        if len(levels) != len(betas) or any(len(a) != len(b) for a, b in zip(levels, betas)):
            raise ValueError("levels and betas do not have matching shapes")
        for lvl in levels:
            ivs = sorted(lvl)
            if any(a[1] >= b[0] for a, b in zip(ivs, ivs[1:])):
                raise ValueError("intervals within a level must be pairwise disjoint")
        if any(b < 0 for lvl in betas for b in lvl):
            raise ValueError("dual weights must be nonnegative")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "betas", betas)

    @property
    def k(self) -> int:
        return len(self.levels)

    @property
    def gamma(self) -> Fraction:
        return dual_value(self)


def _candidate_points(levels) -> list:
    ends = sorted({e for lvl in levels for iv in lvl for e in iv})
    return ends + [(a + b) / 2 for a, b in zip(ends, ends[1:])]


def dual_value(family: DualFamily, point_set=None) -> Fraction:
    """Largest total dual weight over the intervals containing any point."""
    for lvl in family.betas:
        if sum(lvl, Fraction(0)) != 1:
            raise ValueError(f"level dual weights sum to {sum(lvl, Fraction(0))}, expected 1")
    pts = _candidate_points(family.levels) if point_set is None else [Fraction(p) for p in point_set]
    best = Fraction(0)
    for p in pts:
        d = sum((b for lvl, bl in zip(family.levels, family.betas)
                 for (lo, hi), b in zip(lvl, bl) if lo <= p <= hi), Fraction(0))
        best = max(best, d)
    return best


def geometric_cliques(family: DualFamily) -> list:
    """Maximal overlap cells of a family as 1-based label sets (level-major order)."""
    flat = [iv for lvl in family.levels for iv in lvl]
    return [frozenset(k + 1 for k in members) for members, _, _ in maximal_cliques(flat)]


def clique_depth_value(cliques: Sequence, beta) -> Fraction:
    """Max over cliques of the summed dual weights of their members.

    Clique members are 1-based interval labels; ``beta`` is a mapping from
    label to weight or a sequence where ``beta[j - 1]`` belongs to label j.
    """
    bmap = _frac_map(beta)
    best = Fraction(0)
    for c in cliques:
        try:
            best = max(best, sum((bmap[j] for j in c), Fraction(0)))
        except KeyError as exc:
            raise IndexError(f"clique member {exc.args[0]} has no dual weight") from None
    return best


def maximal_independent_sets(n: int, edges) -> list:
    """Maximal independent sets of the graph on labels 1..n (sorted tuples)."""
    g = nx.Graph()
    g.add_nodes_from(range(1, n + 1))
    g.add_edges_from(tuple(e) for e in edges)
    return sorted(tuple(sorted(c)) for c in nx.find_cliques(nx.complement(g)))


def level_labels(sizes: Sequence[int]) -> list:
    """1-based labels per level, numbered consecutively."""
    out, nxt = [], 1
    for s in sizes:
        out.append(list(range(nxt, nxt + s)))
        nxt += s
    return out


def within_level_edges(sizes: Sequence[int]) -> list:
    return [pair for lvl in level_labels(sizes) for pair in combinations(lvl, 2)]


def level_sums(sizes: Sequence[int], beta) -> list:
    bmap = _frac_map(beta)
    return [sum((bmap.get(j, Fraction(0)) for j in lvl), Fraction(0)) for lvl in level_labels(sizes)]


F = Fraction

# Forbidden overlaps for the main case of the four-level argument.
FOUR_LEVEL_EDGES = (
    (2, 3), (4, 5), (4, 6), (5, 6), (7, 8), (7, 9), (7, 10), (8, 9), (8, 10), (9, 10),
    (1, 6), (1, 9), (1, 10), (2, 6), (2, 9), (2, 10), (3, 10), (4, 9), (4, 10), (5, 10),
    (6, 7), (6, 8),
)
FOUR_LEVEL_CLIQUES = (
    (1, 2, 4, 7), (1, 2, 4, 8), (1, 2, 5, 7), (1, 2, 5, 8),
    (1, 3, 4, 7), (1, 3, 4, 8), (1, 3, 5, 7), (1, 3, 5, 8),
    (3, 5, 9), (3, 6, 9), (6, 10),
)
FOUR_LEVEL_BETA = {1: F(1), 2: F(1, 2), 3: F(1, 2), 4: F(1, 12), 5: F(1, 12), 6: F(5, 6),
               7: F(0), 8: F(0), 9: F(1, 4), 10: F(3, 4)}
FOUR_LEVEL_CASE1_BETA = {1: F(1), 2: F(1), 3: F(0), 4: F(1, 3), 5: F(1, 3), 6: F(1, 3),
                     7: F(1, 4), 8: F(1, 4), 9: F(1, 4), 10: F(1, 4)}
FOUR_LEVEL_CASE2_BETA = {1: F(1), 2: F(1, 2), 3: F(1, 2), 4: F(0), 5: F(0), 6: F(1),
                     7: F(1), 8: F(0), 9: F(0), 10: F(0)}


@dataclass
class Check:
    """One certificate line: ``value`` compared against ``bound``."""

    check: str
    value: object
    bound: object
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return str(v)
            return v

        return {"check": self.check, "value": enc(self.value), "bound": enc(self.bound),
                "pass": bool(self.passed),
                **{k: enc(v) for k, v in self.detail.items()}}


def four_level_checks() -> list:
    sizes = (1, 2, 3, 4)
    out = []
    mis = maximal_independent_sets(10, FOUR_LEVEL_EDGES)
    out.append(Check("four_level.M_equals_MIS", len(mis), len(FOUR_LEVEL_CLIQUES),
                     set(mis) == set(FOUR_LEVEL_CLIQUES)))
    sums = level_sums(sizes, FOUR_LEVEL_BETA)
    out.append(Check("four_level.level_sums", sums, [1] * 4, all(s == 1 for s in sums)))
    v = clique_depth_value(FOUR_LEVEL_CLIQUES, FOUR_LEVEL_BETA)
    out.append(Check("four_level.main_case", v, F(19, 12), v == F(19, 12)))

    case1 = maximal_independent_sets(10, within_level_edges(sizes) + [(1, 2)])
    v1 = clique_depth_value(case1, FOUR_LEVEL_CASE1_BETA)
    s1 = level_sums(sizes, FOUR_LEVEL_CASE1_BETA)
    out.append(Check("four_level.case1", v1, F(19, 12),
                     v1 <= F(19, 12) and all(s == 1 for s in s1)))
    case2 = maximal_independent_sets(10, within_level_edges(sizes) + [(1, 6), (1, 7), (6, 7)])
    v2 = clique_depth_value(case2, FOUR_LEVEL_CASE2_BETA)
    s2 = level_sums(sizes, FOUR_LEVEL_CASE2_BETA)
    out.append(Check("four_level.case2", v2, F(3, 2), v2 <= F(3, 2) and all(s == 1 for s in s2)))

    # the dual LP over M cannot exceed the exhibited certificate
    lp_val = four_level_dual_lp()
    out.append(Check("four_level.dual_lp_optimum", lp_val, F(19, 12), lp_val <= F(19, 12)))
    return out


def four_level_dual_lp() -> Fraction:
    """Exact optimum of min gamma over the cliques M with per-level sums 1."""
    n = 11  # beta_1..beta_10, gamma
    rows = []
    for c in FOUR_LEVEL_CLIQUES:
        rows.append(([F(1) if j + 1 in c else F(0) for j in range(10)] + [F(-1)], "<=", 0))
    for lvl in level_labels((1, 2, 3, 4)):
        rows.append(([F(1) if j + 1 in lvl else F(0) for j in range(10)] + [F(0)], EQ, 1))
    c = [F(0)] * 10 + [F(1)]
    sol = solve(LinearProgram(c, rows, "min", [F(0)] * n, [None] * n))
    return sol.objective


# -- five-level argument with depth caps ----------------------------------------------

FIVE_LEVEL_PREFIX = {1: F(1), 2: F(1, 2), 3: F(1, 2), 4: F(1, 10), 5: F(1, 10), 6: F(4, 5)}

# case -> (level-4 assignment, level-5 assignment, caps); names follow the argument
FIVE_LEVEL_CASES = {
    "2.1": ({"I": F(3, 10), "I'": F(7, 10)},
            {"J": F(0), "J'": F(9, 10), "J''": F(1, 10)},
            {"I": F(13, 10), "I'": F(4, 5), "J": F(13, 10), "J'": F(7, 10), "J''": F(3, 2)}),
    "2.2": ({"I": F(1, 2), "I'": F(1, 2)},
            {"J": F(3, 10), "J'": F(2, 5), "J''": F(3, 10)},
            {"I": F(3, 5), "I'": F(4, 5), "J": F(13, 10), "J'": F(3, 5), "J''": F(4, 5)}),
    "3.1": ({"I": F(1, 2), "I'": F(1, 2)},
            {"J": F(1, 5), "J'": F(1, 2), "J''": F(3, 10)},
            {"I": F(4, 5), "I'": F(4, 5), "J": F(4, 5), "J'": F(4, 5), "J''": F(3, 5)}),
    "3.2": ({"I": F(2, 5), "I'": F(3, 5)},
            {"J": F(3, 5), "J'": F(1, 5), "J''": F(1, 5)},
            {"I": F(4, 5), "I'": F(4, 5), "J": F(3, 5), "J'": F(4, 5), "J''": F(4, 5)}),
}


def five_level_checks() -> list:
    bound = F(8, 5)
    out = []
    sizes = (1, 2, 3, 4, 5)
    # Case 1: some level-5 interval (label 11) avoids I_1 and I_2, which are disjoint.
    beta1 = {1: F(1), 2: F(1), 3: F(0), 4: F(1, 3), 5: F(1, 3), 6: F(1, 3),
             7: F(1, 4), 8: F(1, 4), 9: F(1, 4), 10: F(1, 4),
             11: F(1), 12: F(0), 13: F(0), 14: F(0), 15: F(0)}
    g1 = maximal_independent_sets(15, within_level_edges(sizes) + [(1, 2), (1, 11), (2, 11)])
    v1 = clique_depth_value(g1, beta1)
    s1 = level_sums(sizes, beta1)
    out.append(Check("five_level.case1", v1, bound, v1 <= bound and all(s == 1 for s in s1),
                     {"exact": v1}))

    # Levels 1-3 prefix: I_1 and I_6 disjoint.
    gp = maximal_independent_sets(6, within_level_edges((1, 2, 3)) + [(1, 6)])
    vp = clique_depth_value(gp, FIVE_LEVEL_PREFIX)
    sp = level_sums((1, 2, 3), FIVE_LEVEL_PREFIX)
    out.append(Check("five_level.prefix_depth", vp, bound, vp <= bound and all(s == 1 for s in sp)))

    for name, (lvl4, lvl5, caps) in FIVE_LEVEL_CASES.items():
        # each completed interval X sits where the depth is at most caps[X];
        # a two-member clique {cap_X, X} carries that depth plus beta_X
        labels = list(caps)
        beta = {}
        cliques = []
        for j, lab in enumerate(labels):
            beta[2 * j + 1] = caps[lab]
            beta[2 * j + 2] = {**lvl4, **lvl5}[lab]
            cliques.append((2 * j + 1, 2 * j + 2))
        v = clique_depth_value(cliques, beta)
        sums = [sum(lvl4.values(), F(0)), sum(lvl5.values(), F(0))]
        ok = v <= bound and all(s == 1 for s in sums)
        out.append(Check(f"five_level.case{name}", v, bound, ok,
                         {"level4_sum": sums[0], "level5_sum": sums[1]}))
    return out


# -- level recurrence ---------------------------------------------------------------------

SQRT5 = sympy.sqrt(5)
PSI1 = (1 + SQRT5) / 2
PSI2 = (1 - SQRT5) / 2
C1 = (7 - 4 * PSI2) / (PSI1 - PSI2)
C2 = (4 * PSI1 - 7) / (PSI1 - PSI2)
D1 = (1 - PSI2 / 2) / (PSI1 - PSI2)
D2 = (PSI1 / 2 - 1) / (PSI1 - PSI2)
GAMMA_INF = (35 - SQRT5) / 20


def closed_form_A(l: int):
    return sympy.nsimplify(sympy.expand(C1 * PSI1 ** l + C2 * PSI2 ** l - 1))


def closed_form_B(l: int):
    return sympy.nsimplify(sympy.expand(D1 * PSI1 ** l + D2 * PSI2 ** l - sympy.Rational(1, 2)))


def integer_sequences(n: int) -> tuple[list, list]:
    """A_0..A_n and B_0..B_n from their integer-step recurrences."""
    A = [3, 6]
    B = [F(0), F(1, 2)]
    while len(A) <= n:
        A.append(A[-1] + A[-2] + 1)
        B.append(B[-1] + B[-2] + F(1, 2))
    return A[: n + 1], B[: n + 1]


@dataclass(frozen=True)
class RecurrenceTable:
    k: int
    A: tuple
    B: tuple
    alpha3: Fraction
    alpha_levels: dict
    betas: tuple
    gamma_star: Fraction

    def level_sums(self) -> list:
        return [sum(lvl, F(0)) for lvl in self.betas]


def recurrence_table(k: int) -> RecurrenceTable:
    """Exact dual assignment of the k-level lower-bound family."""
    if k < 4:
        raise ValueError("recurrence needs k >= 4")
    A, B = integer_sequences(k - 3)
    alpha3 = B[k - 3] / A[k - 3]
    alphas = {l: A[l - 4] * alpha3 - B[l - 4] for l in range(4, k + 1)}
    betas = [(F(1),), (F(1, 2), F(1, 2)), (alpha3, alpha3, 1 - 2 * alpha3)]
    for l in range(4, k + 1):
        betas.append(tuple([F(0)] * (l - 2) + [alphas[l], 1 - alphas[l]]))
    return RecurrenceTable(k, tuple(A), tuple(B), alpha3, alphas, tuple(betas),
                           alpha3 + F(3, 2))


def gamma_star(k: int) -> Fraction:
    return recurrence_table(k).gamma_star


def gamma_star_limit() -> float:
    return float(GAMMA_INF)


def lemma2_compose(claim_bound, window: int) -> Fraction:
    """Net-integral bound for arbitrary unit intervals from a per-window bound."""
    if window < 2:
        raise ValueError("window must be at least 2")
    return Fraction(claim_bound) + Fraction(2, window)


# -- random configuration audit -------------------------------------------------------------

AUDIT_BOUNDS = {(4, 5): F(19, 12), (5, 6): F(8, 5)}


def _random_level(rng, size: int, window: int, den: int) -> list:
    free = (window - size) * den
    while True:
        u = sorted(int(v) for v in rng.integers(0, free + 1, size=size))
        if len(set(u)) == size:
            return [(F(u[j], den) + j, F(u[j], den) + j + 1) for j in range(size)]


def config_gamma(levels: Sequence) -> Fraction:
    """Exact optimum of max sum_l alpha_l s.t. x(I) >= alpha_l, sum x = 1, x >= 0.

    Points are the maximal overlap cells of all intervals; any other point
    is dominated by one of them.
    """
    flat = [iv for lvl in levels for iv in lvl]
    reps = [lo for _, lo, _ in maximal_cliques(flat)]
    npts, k = len(reps), len(levels)
    n = npts + k
    rows = []
    for l, lvl in enumerate(levels):
        for lo, hi in lvl:
            coeffs = [F(1) if lo <= p <= hi else F(0) for p in reps] + [F(0)] * k
            coeffs[npts + l] = F(-1)
            rows.append((coeffs, GE, 0))
    rows.append(([F(1)] * npts + [F(0)] * k, EQ, 1))
    c = [F(0)] * npts + [F(1)] * k
    sol = solve(LinearProgram(c, rows, "max", [F(0)] * n, [None] * n))
    return sol.objective


def random_config_audit(k: int, window: int, trials: int, seed: int, den: int = 64) -> dict:
    """Sample per-level disjoint unit intervals in [0, window] and record the
    largest exact primal optimum."""
    rng = np.random.default_rng(seed)
    bound = AUDIT_BOUNDS.get((k, window))
    worst, worst_cfg = F(0), None
    for _ in range(trials):
        levels = [_random_level(rng, l, window, den) for l in range(1, k + 1)]
        g = config_gamma(levels)
        if g > worst:
            worst, worst_cfg = g, levels
    ok = True if bound is None else worst <= bound
    return {"k": k, "window": window, "trials": trials, "seed": seed, "max_gamma": worst,
            "bound": bound, "pass": ok, "worst_config": worst_cfg}
