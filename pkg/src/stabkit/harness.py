"""Instance generators, gap experiments, and Monte Carlo audits."""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from . import kernels
from .analysis import limitation_density
from .errors import KindError
from .exact import (SHIFT_GRID, _demand, brute_force_opt, continuity_check, draw_shift_index,
                    psi_profile, stacked_bounds)
from .lp import solve_relaxation
from .model import (HORIZONTAL, VERTICAL, Instance, IntervalSystem, Line, Rect, discretize,
                    maximal_cliques)
from .rounding import gaur_round, ks_round, segstab_round, unitsq_round

E_RATIO = math.e / (math.e - 1)
SEGSTAB_RATIO = 1.935
UNITSQ_RATIO = Fraction(119, 60)
COLUMNS = ("instance_id", "kind", "n_rects", "n_lines", "lp_value", "opt", "gaur", "ks",
           "segstab_rand_mean", "segstab_derand", "unitsq_derand",
           "ratio_opt", "ratio_gaur", "ratio_ks", "ratio_segstab_rand_mean",
           "ratio_segstab_derand", "ratio_unitsq_derand")


def worker_count() -> int:
    env = os.environ.get("STABKIT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# -- generators ------------------------------------------------------------------------

def _sq(x, y) -> Rect:
    x, y = Fraction(x), Fraction(y)
    return Rect(x, x + 1, y, y + 1)


def gen_three_halves_lb() -> Instance:
    """Two lines per axis and one unit square per pair of lines."""
    h = Fraction(1, 2)
    rects = (
        _sq(0, 2), _sq(2, 0),           # pairs {v0, v1} and {h0, h1}
        _sq(-h, -h), _sq(-h, h),        # {v0, h0}, {v0, h1}
        _sq(h, -h), _sq(h, h),          # {v1, h0}, {v1, h1}
    )
    hl = (Line(HORIZONTAL, 0), Line(HORIZONTAL, 1))
    vl = (Line(VERTICAL, 0), Line(VERTICAL, 1))
    inst = Instance(rects, hl, vl, kind="unitsqrstab")
    assert all(len(inst.stabbers(i)) == 2 for i in range(len(rects)))
    return inst


GEN_DEN = 8


def _rng(seed):
    return np.random.default_rng(list(seed) if isinstance(seed, (tuple, list)) else seed)


def _coord(rng, lo: int, hi: int) -> Fraction:
    return Fraction(int(rng.integers(lo * GEN_DEN, hi * GEN_DEN + 1)), GEN_DEN)


def _span_around(rng, c: Fraction, max_len: int = 1) -> tuple:
    a = Fraction(int(rng.integers(0, max_len * GEN_DEN + 1)), GEN_DEN)
    b = Fraction(int(rng.integers(0, max_len * GEN_DEN + 1)), GEN_DEN)
    return c - a, c + b


def _tight(c: Fraction) -> tuple:
    """A short span around ``c`` containing no other grid coordinate."""
    eps = Fraction(1, 4 * GEN_DEN)
    return c - eps, c + eps


def _gap(rng, size: int) -> tuple:
    """A short span containing no grid coordinate (so no line at all)."""
    c = Fraction(2 * int(rng.integers(0, 4 * size)) + 1, 8)
    return _tight(c)


def _lines(rng, n_lines: int, size: int):
    pool = [Fraction(k, 4) for k in range(4 * size + 1)]
    coords = {HORIZONTAL: [], VERTICAL: []}
    for _ in range(n_lines):
        o = VERTICAL if rng.random() < 0.5 else HORIZONTAL
        free = [c for c in pool if c not in coords[o]]
        coords[o].append(free[int(rng.integers(0, len(free)))])
    for o in coords:
        coords[o].sort()
    return coords


def _pair_rect(rng, kind: str, coords: dict, size: int):
    """A rect stabbed by exactly one or two chosen lines, or None if the
    drawn pattern is unavailable."""
    v, h = coords[VERTICAL], coords[HORIZONTAL]
    pattern = int(rng.integers(0, 3))
    if pattern == 0 and len(v) >= 2:  # two neighbouring vertical lines
        k = int(rng.integers(0, len(v) - 1))
        xs = (v[k], v[k + 1])
        if kind == "rectstab":
            return (*xs, *_gap(rng, size))
        y = _gap(rng, size)[0]
        return (*xs, y, y)
    if pattern == 1 and len(h) >= 2 and kind != "horizsegstab":  # two horizontal lines
        k = int(rng.integers(0, len(h) - 1))
        ys = (h[k], h[k + 1])
        if kind == "rectstab":
            return (*_gap(rng, size), *ys)
        x = _gap(rng, size)[0]
        return (x, x, *ys)
    if v and h:  # one line of each orientation
        xv = v[int(rng.integers(0, len(v)))]
        yh = h[int(rng.integers(0, len(h)))]
        if kind == "rectstab":
            return (*_tight(xv), *_tight(yh))
        if kind == "horizsegstab" or rng.random() < 0.5:
            return (*_tight(xv), yh, yh)
        return (xv, xv, *_tight(yh))
    return None


def _free_rect(rng, kind: str, o: str, c: Fraction, size: int):
    """A rect with random extent around line ``(o, c)``."""
    if kind == "rectstab":
        if o == VERTICAL:
            return (*_span_around(rng, c), *_span_around(rng, _coord(rng, 0, size)))
        return (*_span_around(rng, _coord(rng, 0, size)), *_span_around(rng, c))
    horiz = kind == "horizsegstab" or rng.random() < 0.5
    if horiz:
        if o == VERTICAL:
            (x1, x2), y = _span_around(rng, c), _coord(rng, 0, size)
        else:
            (x1, x2), y = _span_around(rng, _coord(rng, 0, size)), c
        if x1 == x2:
            x2 = x1 + Fraction(1, GEN_DEN)
        return (x1, x2, y, y)
    if o == HORIZONTAL:
        (y1, y2), x = _span_around(rng, c), _coord(rng, 0, size)
    else:
        (y1, y2), x = _span_around(rng, _coord(rng, 0, size)), c
    if y1 == y2:
        y2 = y1 + Fraction(1, GEN_DEN)
    return (x, x, y1, y2)


def gen_random(kind: str, n_rects: int, n_lines: int, seed, weighted: bool = False) -> Instance:
    """Reproducible random instance; every rect is built around a line so it
    is always stabbed.

    Most rects are stabbed by exactly two lines (odd cycles among them give
    fractional LP optima); the rest get random extents.  ``unitsqrstab``
    places unit squares at non-integer offsets and discretizes (one line per
    maximal clique), adding squares while the line count stays within
    ``n_lines``; it is always unweighted.
    """
    if kind not in ("rectstab", "segstab", "horizsegstab", "unitsqrstab"):
        raise ValueError(f"unknown kind {kind!r}")
    rng = _rng(seed)
    # a small box keeps rects competing for the same few lines
    size = max(2, (n_lines + 1) // 2)
    if kind == "unitsqrstab":
        return _gen_unit_squares(rng, n_rects, n_lines, size)
    if n_lines < 1:
        raise ValueError("need at least one line")
    coords = _lines(rng, n_lines, size)
    refs = [(o, c) for o in (VERTICAL, HORIZONTAL) for c in coords[o]]
    rects = []
    for _ in range(n_rects):
        r = _pair_rect(rng, kind, coords, size) if rng.random() < 0.75 else None
        if r is None:
            o, c = refs[int(rng.integers(0, len(refs)))]
            r = _free_rect(rng, kind, o, c, size)
        rects.append(Rect(*r))

    def w():
        return Fraction(int(rng.integers(1, 6))) if weighted else Fraction(1)

    hl = tuple(Line(HORIZONTAL, c, w()) for c in coords[HORIZONTAL])
    vl = tuple(Line(VERTICAL, c, w()) for c in coords[VERTICAL])
    return Instance(tuple(rects), hl, vl, kind=kind, weighted=weighted)


def _gen_unit_squares(rng, n_rects: int, n_lines: int, size: int) -> Instance:
    side = max(2, n_lines // 3)
    rects: list = []
    den = 16
    for _ in range(20 * n_rects):
        if len(rects) == n_rects:
            break
        # odd numerators keep offsets off the integer grid
        x = Fraction(2 * int(rng.integers(0, side * den // 2)) + 1, den)
        y = Fraction(2 * int(rng.integers(0, side * den // 2)) + 1, den)
        cand = rects + [_sq(x, y)]
        if discretize(cand, "unitsqrstab").n_lines <= n_lines:
            rects = cand
    if not rects:
        rects = [_sq(Fraction(1, den), Fraction(1, den))]
    return discretize(rects, "unitsqrstab")


# -- limitation profile ------------------------------------------------------------------

@dataclass(frozen=True)
class LimitationProfile:
    """Pseudo LP values with x* = y*; ``counts[i]`` values lie in (i/N, (i+1)/N)."""

    N: int
    counts: tuple
    values: tuple

    @property
    def lp_value(self) -> Fraction:
        return 2 * sum(self.values, Fraction(0))


def gen_limitation_profile(N: int) -> LimitationProfile:
    if N < 100:
        raise ValueError("N must be at least 100")
    counts, values = [], []
    for i in range(N):
        c = math.floor(N * limitation_density(Fraction(i, N)))
        counts.append(c)
        values.extend(Fraction(i, N) + Fraction(j + 1, (c + 1) * N) for j in range(c))
    return LimitationProfile(N, tuple(counts), tuple(values))


def limitation_ratio_lower_bound(profile: LimitationProfile) -> tuple:
    """Rigorous lower bound on min over (tx, ty) of rounded weight / LP value.

    Thresholds are grouped by cell: for tx in [i/N, (i+1)/N) every value in a
    later cell is rounded, every value in an earlier cell is small, and a
    value v in cell i costs at least min(1, v * q) where q = 1/(1 - ty) is at
    least 1/(1 - j/N) for ty in cell j.  Returns ``(ratio, tx, ty)`` with the
    left ends of the minimising cells.
    """
    N = profile.N
    cell_sum = np.zeros(N + 1)
    for v in profile.values:
        cell_sum[min(int(v * N), N - 1)] += float(v)
    cnt = np.concatenate([np.asarray(profile.counts, dtype=np.float64), [0.0]])
    V = float(profile.lp_value)
    # index N stands for tau = 1: nothing rounded, every value small
    above = np.concatenate([np.cumsum(cnt[::-1])[::-1][1:], [0.0]])
    below = np.concatenate([[0.0], np.cumsum(cell_sum)[:-1]])
    t = np.arange(N + 1) / N
    with np.errstate(divide="ignore"):
        q = np.where(t < 1, 1.0 / (1.0 - t), np.inf)
    with np.errstate(invalid="ignore"):
        small = np.where(below[:, None] == 0, 0.0, below[:, None] * q[None, :])
        own = cnt[:, None] * np.minimum(1.0, np.where(t[:, None] == 0, 0.0, t[:, None] * q[None, :]))
    # half[a, b]: cost of one axis with its threshold in cell a, other in cell b
    half = above[:, None] + small + own
    total = (half + half.T) / V
    k = int(np.argmin(total))
    a, b = divmod(k, N + 1)
    return float(total[a, b]), float(t[a]), float(t[b])


# -- Monte Carlo audits -----------------------------------------------------------------

def _int_scale(fracs, extra: int) -> int:
    d = 1
    for f in fracs:
        d = lcm(d, Fraction(f).denominator)
    return d * extra


def net_frequency_audit(system: IntervalSystem, eps, n_seeds: int, seed0: int = 0,
                        backend=None) -> dict:
    """Selection frequency of each point over ``n_seeds`` random nets, and the
    number of draws that missed a demanded interval."""
    eps = Fraction(eps)
    bounds = stacked_bounds(system.values)
    scale = _int_scale([b for lh in bounds for b in lh] + [eps], SHIFT_GRID)
    top = (bounds[-1][1] if bounds else 0) * scale
    if top >= 2 ** 62 or eps * scale >= 2 ** 62:
        raise ValueError("values too fine for the integer audit scale")
    lo = [int(a * scale) for a, _ in bounds]
    hi = [int(b * scale) for _, b in bounds]
    period = int(eps * scale)
    js = np.array([draw_shift_index(seed0 + s) for s in range(n_seeds)], dtype=np.int64)
    shifts = js * (period // SHIFT_GRID)
    spans = system.spans()
    dem = _demand(system, eps)
    dem_a = [spans[k][0] for k in dem]
    dem_b = [spans[k][1] for k in dem]
    counts, bad = kernels.net_stats(lo, hi, period, shifts, dem_a, dem_b, backend=backend)
    freq = counts / n_seeds
    expected = np.array([float(v / eps) for v in system.values])
    return {"frequency": freq, "expected": expected,
            "max_dev": float(np.max(np.abs(freq - np.minimum(expected, 1.0)))) if len(freq) else 0.0,
            "infeasible": bad, "n_seeds": n_seeds}


def crossing_frequency(length, period, trials: int, seed: int, backend=None) -> float:
    """Fraction of uniform shifts whose partition cuts an interval of ``length``."""
    rng = np.random.default_rng(seed)
    shifts = rng.random(trials) * float(period)
    lo = float(period)  # interval placed away from the host segment ends
    return kernels.crossing_count(lo, lo + float(length), float(period), shifts,
                                  backend=backend) / trials


def random_unit_system(rng, window, max_intervals: int = 8, den: int = 16) -> IntervalSystem:
    """Unit intervals inside [0, window] with one point per maximal clique
    (continuity property) plus a few extra points; unit weights."""
    w = int(window)
    n = int(rng.integers(1, max_intervals + 1))
    ivs = []
    for _ in range(n):
        a = Fraction(int(rng.integers(0, (w - 1) * den + 1)), den)
        ivs.append((a, a + 1))
    pts = set()
    for _, lo, hi in maximal_cliques(ivs):
        pts.add(lo + (hi - lo) * Fraction(int(rng.integers(0, den + 1)), den))
    for _ in range(int(rng.integers(0, 4))):
        pts.add(Fraction(int(rng.integers(0, w * den + 1)), den))
    pts = sorted(pts)
    vals = [Fraction(int(rng.integers(0, den + 1)), 2 * den) for _ in pts]
    return IntervalSystem(tuple((p, v, Fraction(1)) for p, v in zip(pts, vals)), tuple(ivs))


PSI_BOUNDS = {2: Fraction(1), 5: Fraction(19, 12), 6: Fraction(8, 5), None: UNITSQ_RATIO}


def _psi_chunk(args):
    window, seeds = args
    bound = PSI_BOUNDS[window]
    host = 12 if window is None else window
    worst, viol = Fraction(0), 0
    for s in seeds:
        rng = np.random.default_rng(s)
        sys_ = random_unit_system(rng, host)
        assert continuity_check(sys_)
        xv = sys_.total_value()
        pb = psi_profile(sys_).psi_bar
        if xv > 0:
            worst = max(worst, pb / xv)
        if pb > bound * xv:
            viol += 1
    return worst, viol


def psi_audit(window, trials: int, seed: int = 0, workers: int | None = None) -> dict:
    """Check psi_bar <= bound * x(V) on random continuity-respecting systems.

    ``window`` is 2, 5, 6 (host segment [0, window]) or None (unrestricted
    bound on a longer host).
    """
    workers = workers or worker_count()
    seeds = [(seed, window or 0, t) for t in range(trials)]
    chunks = [(window, seeds[i::workers]) for i in range(workers)]
    if workers == 1:
        results = [_psi_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_psi_chunk, chunks))
    worst = max(r[0] for r in results)
    viol = sum(r[1] for r in results)
    return {"window": window, "trials": trials, "bound": PSI_BOUNDS[window],
            "max_ratio": worst, "violations": viol}


# -- gap experiments ---------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Gap experiment settings; ``seed`` fixes the whole instance stream."""

    generator: str = "random"
    kind: str = "segstab"
    n_rects: int = 8
    n_lines: int = 10
    trials: int = 20
    seed: int = 0
    weighted: bool = False
    opt_cap: int = 24
    segstab_samples: int = 8
    out_csv: str | None = None
    out_json: str | None = None
    modes: Sequence = field(default_factory=lambda: ["gaur", "ks", "segstab", "unitsq"])

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _instance(cfg: ExperimentConfig, idx: int) -> Instance:
    if cfg.generator == "three_halves":
        return gen_three_halves_lb()
    if cfg.generator == "random":
        return gen_random(cfg.kind, cfg.n_rects, cfg.n_lines, (cfg.seed, idx), cfg.weighted)
    raise ValueError(f"unknown generator {cfg.generator!r}")


def _ratio(w, z):
    if w is None:
        return None
    if z == 0:
        return 1.0 if w == 0 else math.inf
    return float(Fraction(w) / z)


def gap_row(cfg: ExperimentConfig, idx: int) -> dict:
    inst = _instance(cfg, idx)
    lp = solve_relaxation(inst)
    z = lp.objective
    row = {c: None for c in COLUMNS}
    row.update(instance_id=idx, kind=inst.kind, n_rects=len(inst.rects), n_lines=inst.n_lines,
               lp_value=z)
    if inst.n_lines <= cfg.opt_cap:
        row["opt"] = brute_force_opt(inst, cfg.opt_cap).weight
    if "gaur" in cfg.modes:
        row["gaur"] = gaur_round(inst, lp).weight
    if "ks" in cfg.modes and all(r.is_horizontal_segment for r in inst.rects):
        row["ks"] = ks_round(inst, lp).weight
    segs = all(r.is_horizontal_segment or r.is_vertical_segment for r in inst.rects)
    if "segstab" in cfg.modes and segs:
        row["segstab_derand"] = segstab_round(inst, lp, "derandomized").weight
        ws = [segstab_round(inst, lp, "random", seed=(cfg.seed, idx, s)).weight
              for s in range(cfg.segstab_samples)]
        row["segstab_rand_mean"] = sum(ws, Fraction(0)) / len(ws)
    if "unitsq" in cfg.modes:
        try:
            row["unitsq_derand"] = unitsq_round(inst, lp, "derandomized").weight
        except KindError:
            pass
    for name in ("opt", "gaur", "ks", "segstab_rand_mean", "segstab_derand", "unitsq_derand"):
        row[f"ratio_{name}"] = _ratio(row[name], z)
    return row


def row_violations(row: dict) -> list:
    """Guarantee and sandwich failures of one row."""
    z, opt = row["lp_value"], row["opt"]
    out = []
    limits = {"gaur": 2, "ks": E_RATIO, "segstab_derand": SEGSTAB_RATIO,
              "unitsq_derand": UNITSQ_RATIO}
    for name, c in limits.items():
        w = row[name]
        if w is not None and float(w) > float(c) * float(z) + 1e-9:
            out.append(f"{name} weight {w} exceeds {float(c):.6g} * LP {z}")
    if opt is not None:
        if opt < z:
            out.append(f"OPT {opt} below LP {z}")
        for name in ("gaur", "ks", "segstab_rand_mean", "segstab_derand", "unitsq_derand"):
            w = row[name]
            if w is not None and w < opt:
                out.append(f"{name} weight {w} below OPT {opt}")
    return out


def _rows_chunk(args):
    cfg, ids = args
    return [gap_row(cfg, i) for i in ids]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_val(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def run_gap_experiment(config: ExperimentConfig, workers: int | None = None) -> dict:
    """Run all trials, write CSV/JSON if paths are set, and return the report.

    The report's ``violations`` list is empty when every row respects the
    per-method guarantee and the LP <= OPT <= algorithm sandwich.
    """
    n = 1 if config.generator == "three_halves" else config.trials
    workers = min(workers or worker_count(), max(n, 1))
    ids = list(range(n))
    if workers == 1:
        rows = _rows_chunk((config, ids))
    else:
        with ProcessPoolExecutor(workers) as ex:
            parts = ex.map(_rows_chunk, [(config, ids[i::workers]) for i in range(workers)])
            rows = [r for p in parts for r in p]
    rows.sort(key=lambda r: r["instance_id"])
    violations = [{"instance_id": r["instance_id"], "message": m}
                  for r in rows for m in row_violations(r)]
    summary = {}
    for c in COLUMNS:
        if c.startswith("ratio_"):
            vals = [r[c] for r in rows if r[c] is not None]
            if vals:
                summary[c] = {"max": max(vals), "mean": sum(vals) / len(vals), "count": len(vals)}
    report = {"config": {k: (list(v) if k == "modes" else v) for k, v in asdict(config).items()},
              "rows": [{k: _json_val(r[k]) for k in COLUMNS} for r in rows],
              "summary": summary, "violations": violations}
    if config.out_csv:
        _write(config.out_csv, lambda fh: _write_csv(fh, rows))
    if config.out_json:
        _write(config.out_json, lambda fh: json.dump(_jsonable(report), fh, indent=2, sort_keys=True))
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _json_val(obj)


def _write_csv(fh, rows):
    wr = csv.writer(fh, lineterminator="\r\n")
    wr.writerow(COLUMNS)
    for r in rows:
        wr.writerow([_cell(r[c]) for c in COLUMNS])


def _write(path, fn):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fn(fh)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
