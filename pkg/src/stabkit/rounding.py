"""LP rounding schemes: half-split, KS threshold rounding, segment-stabbing
dual thresholds, and unit-square complementary nets."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import KindError, UncoverableError
from .exact import min_weight_hitting, threshold_net
from .lp import LPSolution
from .model import HORIZONTAL, VERTICAL, Instance, StabSolution, as_fraction, project

HALF = Fraction(1, 2)
INF = math.inf


@dataclass(frozen=True)
class ThresholdSchedule:
    """Distribution of the first threshold and the map to the second one.

    The first threshold has density ``2(t - alpha) / (beta - alpha)**2`` on
    ``[alpha, beta]``; the second is ``h(t) = 1 - (1 - beta)**2 / (1 - t)``.
    Subclass and override :meth:`sample` / :meth:`density` to plug in
    another distribution.
    """

    alpha: Fraction = Fraction(1, 4)
    beta: Fraction = Fraction(9, 20)

    def __post_init__(self):
        a, b = Fraction(self.alpha), Fraction(self.beta)
        if not 0 < a < b < 1:
            raise ValueError("schedule needs 0 < alpha < beta < 1")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def gamma_thr(self) -> Fraction:
        return self.h(self.alpha)

    def h(self, t):
        if isinstance(t, Fraction):
            return 1 - (1 - self.beta) ** 2 / (1 - t)
        b = float(self.beta)
        return 1.0 - (1.0 - b) ** 2 / (1.0 - t)

    def h_inverse(self, z):
        """Solve ``h(t) = z`` for t."""
        if isinstance(z, Fraction):
            return 1 - (1 - self.beta) ** 2 / (1 - z)
        b = float(self.beta)
        return 1.0 - (1.0 - b) ** 2 / (1.0 - z)

    def density(self, t: float) -> float:
        a, b = float(self.alpha), float(self.beta)
        return 2.0 * (t - a) / (b - a) ** 2 if a <= t <= b else 0.0

    def cdf(self, t):
        if t <= self.alpha:
            return 0 * t
        if t >= self.beta:
            return 1 + 0 * t
        return ((t - self.alpha) / (self.beta - self.alpha)) ** 2

    def sample(self, rng: np.random.Generator) -> Fraction:
        u = rng.random()
        a, b = float(self.alpha), float(self.beta)
        return Fraction(a + (b - a) * math.sqrt(u))


DEFAULT_SCHEDULE = ThresholdSchedule()


def lp_vectors(instance: Instance, lp_solution) -> tuple[list, list]:
    """``(x, y)``: LP values of vertical and horizontal lines as Fractions."""
    values = lp_solution.values if isinstance(lp_solution, LPSolution) else lp_solution
    if len(values) != instance.n_lines:
        raise ValueError("LP solution does not match the instance")
    vals = [as_fraction(v) for v in values]
    nv = len(instance.vlines)
    return vals[:nv], vals[nv:]


def weighted_mass(instance: Instance, x, y) -> tuple[Fraction, Fraction]:
    wx = sum((l.weight * v for l, v in zip(instance.vlines, x)), Fraction(0))
    wy = sum((l.weight * v for l, v in zip(instance.hlines, y)), Fraction(0))
    return wx, wy


def _ratio(num, den):
    if den == 0:
        return Fraction(0) if num == 0 else INF
    return num / den


def _finish(instance: Instance, chosen, info=None) -> StabSolution:
    chosen = tuple(sorted(set(chosen)))
    cs = set(chosen)
    witness = []
    for i in range(len(instance.rects)):
        w = next((s for s in instance.stabbers(i) if s in cs), None)
        if w is None:
            raise AssertionError(f"rounding left rect {i} unstabbed")
        witness.append(w)
    return StabSolution(chosen, instance.weight_of(chosen), tuple(witness), info or {})


def _hit(instance: Instance, axis: str, rect_ids) -> list:
    """Exact cheapest lines of one orientation stabbing the given rects."""
    rect_ids = list(rect_ids)
    if not rect_ids:
        return []
    system = project(instance, axis)
    sol = min_weight_hitting(system, rect_ids)
    o = VERTICAL if axis == "x" else HORIZONTAL
    return [(o, k) for k in sol.chosen]


def _stabbed_by(instance: Instance, chosen: set) -> list:
    return [any(s in chosen for s in instance.stabbers(i)) for i in range(len(instance.rects))]


def _masses(instance: Instance, x, y):
    """Per rect: (vertical LP mass, horizontal LP mass)."""
    out = []
    for i in range(len(instance.rects)):
        mv = sum((x[k] for o, k in instance.stabbers(i) if o == VERTICAL), Fraction(0))
        mh = sum((y[k] for o, k in instance.stabbers(i) if o == HORIZONTAL), Fraction(0))
        out.append((mv, mh))
    return out


# -- half split -------------------------------------------------------------------

def gaur_round(instance: Instance, lp_solution) -> StabSolution:
    """Half-split rounding: rects with horizontal LP mass >= 1/2 are stabbed
    optimally by horizontal lines, the rest optimally by vertical lines."""
    x, y = lp_vectors(instance, lp_solution)
    type_h, type_v = [], []
    for i, (mv, mh) in enumerate(_masses(instance, x, y)):
        (type_h if mh >= HALF else type_v).append(i)
    chosen = _hit(instance, "y", type_h) + _hit(instance, "x", type_v)
    wx, wy = weighted_mass(instance, x, y)
    return _finish(instance, chosen, {"method": "gaur", "type_h": type_h, "type_v": type_v,
                                      "bound": 2 * (wx + wy)})


# -- Kovaleva-Spieksma ---------------------------------------------------------------

def _require_horizontal(instance: Instance):
    if not all(r.is_horizontal_segment for r in instance.rects):
        raise KindError(f"ks_round needs horizontal segments, got kind {instance.kind}")


def ks_round(instance: Instance, lp_solution, mode: str = "best_k", seed=None,
             rho=None) -> StabSolution:
    """Threshold rounding for horizontal-segment instances.

    ``best_k`` tries every prefix of the horizontal lines sorted by LP value
    and returns the cheapest; ``random`` draws a threshold uniformly from
    ``[0, rho]`` (default ``1 - 1/e``).
    """
    _require_horizontal(instance)
    x, y = lp_vectors(instance, lp_solution)
    wx, _ = weighted_mass(instance, x, y)
    m = len(instance.hlines)
    hw = [l.weight for l in instance.hlines]

    def with_rounded(rounded):
        chosen = {(HORIZONTAL, j) for j in rounded}
        hit = _stabbed_by(instance, chosen)
        left = [i for i, h in enumerate(hit) if not h]
        return sorted(chosen) + _hit(instance, "x", left)

    if mode == "best_k":
        order = sorted(range(m), key=lambda j: (y[j], j))
        best = None
        exprs = []
        for k in range(m + 1):
            rounded = order[k:]
            yk = y[order[k]] if k < m else Fraction(1)
            expr = sum((hw[j] for j in rounded), Fraction(0)) + _ratio(wx, 1 - yk)
            exprs.append(expr)
            try:
                sol = _finish(instance, with_rounded(rounded))
            except UncoverableError:
                continue
            if best is None or sol.weight < best[0].weight:
                best = (sol, k)
        sol, k = best
        info = {"method": "ks", "mode": mode, "k": k + 1, "bound_min": min(exprs),
                "bounds": exprs}
        return StabSolution(sol.chosen, sol.weight, sol.witness, info)
    if mode == "random":
        rho = Fraction(1) - Fraction(math.exp(-1)) if rho is None else as_fraction(rho)
        rng = np.random.default_rng(seed)
        tau = Fraction(rng.random()) * rho
        rounded = [j for j in range(m) if y[j] >= tau]
        bound = sum((hw[j] for j in rounded), Fraction(0)) + _ratio(wx, 1 - tau)
        return _finish(instance, with_rounded(rounded),
                       {"method": "ks", "mode": mode, "tau": tau, "bound": bound})
    raise ValueError(f"unknown ks mode {mode!r}")


# -- segment stabbing ------------------------------------------------------------------

def _require_segments(instance: Instance):
    if not all(r.is_horizontal_segment or r.is_vertical_segment for r in instance.rects):
        raise KindError(f"segstab_round needs axis-parallel segments, got kind {instance.kind}")


class SegStabRounder:
    """Fixed-threshold evaluation for one (instance, LP solution) pair."""

    def __init__(self, instance: Instance, lp_solution):
        _require_segments(instance)
        self.instance = instance
        self.x, self.y = lp_vectors(instance, lp_solution)
        self._cache: dict = {}

    def bound(self, tx, ty):
        """Analytic weight bound for thresholds ``(tx, ty)``."""
        inst, x, y = self.instance, self.x, self.y
        tx, ty = as_fraction(tx), as_fraction(ty)
        rv = sum((l.weight for l, v in zip(inst.vlines, x) if v >= tx), Fraction(0))
        rh = sum((l.weight for l, v in zip(inst.hlines, y) if v >= ty), Fraction(0))
        xs = sum((l.weight * v for l, v in zip(inst.vlines, x) if v < tx), Fraction(0))
        ys = sum((l.weight * v for l, v in zip(inst.hlines, y) if v < ty), Fraction(0))
        return rv + _ratio(xs, 1 - ty) + rh + _ratio(ys, 1 - tx)

    def evaluate(self, tx, ty) -> StabSolution:
        inst = self.instance
        rv = frozenset(k for k, v in enumerate(self.x) if v >= tx)
        rh = frozenset(k for k, v in enumerate(self.y) if v >= ty)
        key = (rv, rh)
        if key not in self._cache:
            chosen = {(VERTICAL, k) for k in rv} | {(HORIZONTAL, k) for k in rh}
            hit = _stabbed_by(inst, chosen)
            left_h = [i for i, h in enumerate(hit) if not h and inst.rects[i].is_horizontal_segment]
            left_v = [i for i, h in enumerate(hit) if not h and not inst.rects[i].is_horizontal_segment]
            # each leftover horizontal segment has vertical mass >= 1 - ty, so the
            # optimal (1 - ty)-net over leftovers is their exact hitting set
            chosen = sorted(chosen) + _hit(inst, "x", left_h) + _hit(inst, "y", left_v)
            self._cache[key] = _finish(inst, chosen)
        sol = self._cache[key]
        info = {"method": "segstab", "tau_x": as_fraction(tx), "tau_y": as_fraction(ty),
                "bound": self.bound(tx, ty)}
        return StabSolution(sol.chosen, sol.weight, sol.witness, info)

    def candidates(self, schedule: ThresholdSchedule = DEFAULT_SCHEDULE) -> list:
        c = set(self.x) | set(self.y)
        c |= {schedule.alpha, schedule.beta, schedule.gamma_thr, Fraction(0), Fraction(1)}
        return sorted(c)


def segstab_round(instance: Instance, lp_solution, mode: str = "derandomized", seed=None,
                  schedule: ThresholdSchedule = DEFAULT_SCHEDULE) -> StabSolution:
    """Dual-threshold rounding for horizontal and vertical segments.

    ``random`` draws ``t`` from the schedule, pairs it with ``h(t)`` and
    assigns the pair to (x, y) in random order.  ``derandomized`` tries every
    threshold pair from the LP values plus the schedule constants, 0 and 1.
    """
    r = SegStabRounder(instance, lp_solution)
    if mode == "random":
        rng = np.random.default_rng(seed)
        t = schedule.sample(rng)
        t2 = schedule.h(t)
        tx, ty = (t, t2) if rng.random() < 0.5 else (t2, t)
        sol = r.evaluate(tx, ty)
        sol.info["mode"] = mode
        return sol
    if mode in ("derandomized", "derand"):
        cands = r.candidates(schedule)
        best = None
        for tx in cands:
            for ty in cands:
                sol = r.evaluate(tx, ty)
                if best is None or (sol.weight, sol.chosen) < (best.weight, best.chosen):
                    best = sol
        best.info["mode"] = "derandomized"
        best.info["n_candidates"] = len(cands)
        return best
    raise ValueError(f"unknown segstab mode {mode!r}")


# -- unit squares ------------------------------------------------------------------------

def _require_unit_squares(instance: Instance):
    if instance.kind != "unitsqrstab" or instance.weighted:
        raise KindError("unitsq_round needs an unweighted unitsqrstab instance")


class UnitSquareRounder:
    def __init__(self, instance: Instance, lp_solution):
        _require_unit_squares(instance)
        self.instance = instance
        x, y = lp_vectors(instance, lp_solution)
        self.px = project(instance, "x", x)
        self.py = project(instance, "y", y)

    def breakpoints(self) -> list:
        bps = {Fraction(0), Fraction(1)}
        bps |= {m for m in self.px.masses() if 0 <= m <= 1}
        bps |= {1 - m for m in self.py.masses() if 0 <= m <= 1}
        return sorted(bps)

    def evaluate(self, tau) -> StabSolution:
        tau = as_fraction(tau)
        sx = threshold_net(self.px, tau)
        sy = threshold_net(self.py, 1 - tau)
        chosen = [(VERTICAL, k) for k in sx.chosen] + [(HORIZONTAL, k) for k in sy.chosen]
        return _finish(self.instance, chosen, {"method": "unitsq", "tau_x": tau, "tau_y": 1 - tau})


def unitsq_round(instance: Instance, lp_solution, mode: str = "derandomized",
                 seed=None) -> StabSolution:
    """Complementary thresholds ``tau_x + tau_y = 1`` with optimal nets on each
    projection.  ``derandomized`` scans every breakpoint of the two net-size
    step functions and one point inside each gap between them."""
    r = UnitSquareRounder(instance, lp_solution)
    if mode == "random":
        tau = Fraction(np.random.default_rng(seed).random())
        sol = r.evaluate(tau)
        sol.info["mode"] = mode
        return sol
    if mode in ("derandomized", "derand"):
        bps = r.breakpoints()
        pts = list(bps) + [(a + b) / 2 for a, b in zip(bps, bps[1:])]
        best = None
        for tau in sorted(pts):
            sol = r.evaluate(tau)
            if best is None or (sol.weight, sol.chosen) < (best.weight, best.chosen):
                best = sol
        best.info["mode"] = "derandomized"
        return best
    raise ValueError(f"unknown unitsq mode {mode!r}")
