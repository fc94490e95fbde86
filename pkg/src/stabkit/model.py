"""Geometric data model: rectangles, lines, instances and interval systems.

Coordinates, values and weights are :class:`fractions.Fraction` throughout.
Stabbing uses closed intervals, so a line through a rectangle edge stabs it.
"""
from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidInstanceError

HORIZONTAL = "h"
VERTICAL = "v"
KINDS = ("rectstab", "segstab", "horizsegstab", "unitsqrstab")

# (orientation, index into the sorted hlines / vlines)
LineRef = tuple


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions, floats, and "p/q" or decimal strings exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidInstanceError(f"not a rational: {value!r}")
    if isinstance(value, (int, float, str)):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInstanceError(f"not a rational: {value!r}") from exc
    raise InvalidInstanceError(f"not a rational: {value!r}")


def format_fraction(q: Fraction) -> str:
    return str(q)


@dataclass(frozen=True)
class Rect:
    x1: Fraction
    x2: Fraction
    y1: Fraction
    y2: Fraction

    def __post_init__(self):
        for name in ("x1", "x2", "y1", "y2"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise InvalidInstanceError(f"inverted rectangle {self}")

    @property
    def is_unit_square(self) -> bool:
        return self.x2 - self.x1 == 1 and self.y2 - self.y1 == 1

    @property
    def is_horizontal_segment(self) -> bool:
        return self.y1 == self.y2

    @property
    def is_vertical_segment(self) -> bool:
        return self.x1 == self.x2

    def projection(self, axis: str) -> tuple[Fraction, Fraction]:
        return (self.x1, self.x2) if axis == "x" else (self.y1, self.y2)


@dataclass(frozen=True)
class Line:
    orientation: str
    coord: Fraction
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        if self.orientation not in (HORIZONTAL, VERTICAL):
            raise InvalidInstanceError(f"bad orientation {self.orientation!r}")
        object.__setattr__(self, "coord", as_fraction(self.coord))
        object.__setattr__(self, "weight", as_fraction(self.weight))
        if self.weight < 0:
            raise InvalidInstanceError(f"negative weight on {self}")


def stabs(line: Line, r: Rect) -> bool:
    if line.orientation == VERTICAL:
        return r.x1 <= line.coord <= r.x2
    return r.y1 <= line.coord <= r.y2


def _kind_ok(kind: str, r: Rect) -> bool:
    if kind == "segstab":
        return r.is_horizontal_segment or r.is_vertical_segment
    if kind == "horizsegstab":
        return r.is_horizontal_segment
    if kind == "unitsqrstab":
        return r.is_unit_square
    return True


@dataclass(frozen=True)
class Instance:
    """A discrete RectStab instance.

    Lines of each orientation are stored sorted by coordinate; a
    :data:`LineRef` ``("v", i)`` indexes ``vlines[i]``.
    """

    rects: tuple
    hlines: tuple
    vlines: tuple
    kind: str = "rectstab"
    weighted: bool = False
    _stabbers: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInstanceError(f"unknown kind {self.kind!r}")
        rects = tuple(self.rects)
        hl = tuple(sorted(self.hlines, key=lambda l: l.coord))
        vl = tuple(sorted(self.vlines, key=lambda l: l.coord))
        for lines, o in ((hl, HORIZONTAL), (vl, VERTICAL)):
            if any(l.orientation != o for l in lines):
                raise InvalidInstanceError(f"{o}-line list holds a line of the other orientation")
            coords = [l.coord for l in lines]
            if len(set(coords)) != len(coords):
                raise InvalidInstanceError(f"duplicate {o}-line coordinates")
            if not self.weighted and any(l.weight != 1 for l in lines):
                raise InvalidInstanceError("unweighted instance with non-unit weights")
        bad_kind = [i for i, r in enumerate(rects) if not _kind_ok(self.kind, r)]
        if bad_kind:
            raise InvalidInstanceError(f"rects {bad_kind} inconsistent with kind {self.kind}")
        object.__setattr__(self, "rects", rects)
        object.__setattr__(self, "hlines", hl)
        object.__setattr__(self, "vlines", vl)

        vcoords = [l.coord for l in vl]
        hcoords = [l.coord for l in hl]
        stabbers = []
        orphans = []
        for i, r in enumerate(rects):
            s = [(VERTICAL, k) for k in range(bisect_left(vcoords, r.x1), bisect_right(vcoords, r.x2))]
            s += [(HORIZONTAL, k) for k in range(bisect_left(hcoords, r.y1), bisect_right(hcoords, r.y2))]
            if not s:
                orphans.append(i)
            stabbers.append(tuple(s))
        if orphans:
            raise InvalidInstanceError(f"rects stabbed by no candidate line: {orphans}")
        object.__setattr__(self, "_stabbers", tuple(stabbers))

    def line(self, ref: LineRef) -> Line:
        o, k = ref
        return self.vlines[k] if o == VERTICAL else self.hlines[k]

    def line_refs(self) -> list:
        """All lines in lexicographic order: vertical first, then horizontal."""
        return [(VERTICAL, k) for k in range(len(self.vlines))] + [
            (HORIZONTAL, k) for k in range(len(self.hlines))
        ]

    def stabbers(self, rect_index: int) -> tuple:
        return self._stabbers[rect_index]

    @property
    def n_lines(self) -> int:
        return len(self.hlines) + len(self.vlines)

    def weight_of(self, refs: Iterable) -> Fraction:
        return sum((self.line(r).weight for r in refs), Fraction(0))


@dataclass(frozen=True)
class IntervalSystem:
    """Weighted, valued points on a line plus closed intervals over them.

    ``points`` holds ``(position, value, weight)`` triples in strictly
    increasing position; ``intervals`` holds ``(lo, hi)`` pairs.
    """

    points: tuple
    intervals: tuple

    def __post_init__(self):
        pts = tuple((as_fraction(p), as_fraction(v), as_fraction(w)) for p, v, w in self.points)
        for a, b in zip(pts, pts[1:]):
            if not a[0] < b[0]:
                raise InvalidInstanceError("points must be strictly increasing in position")
        if any(v < 0 or w < 0 for _, v, w in pts):
            raise InvalidInstanceError("negative point value or weight")
        ivs = tuple((as_fraction(lo), as_fraction(hi)) for lo, hi in self.intervals)
        if any(lo > hi for lo, hi in ivs):
            raise InvalidInstanceError("inverted interval")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "intervals", ivs)

    @property
    def positions(self) -> list:
        return [p for p, _, _ in self.points]

    @property
    def values(self) -> list:
        return [v for _, v, _ in self.points]

    @property
    def weights(self) -> list:
        return [w for _, _, w in self.points]

    def span(self, k: int) -> tuple[int, int]:
        """Half-open index range ``[a, b)`` of the points inside interval ``k``."""
        lo, hi = self.intervals[k]
        pos = self.positions
        return bisect_left(pos, lo), bisect_right(pos, hi)

    def spans(self) -> list:
        pos = self.positions
        return [(bisect_left(pos, lo), bisect_right(pos, hi)) for lo, hi in self.intervals]

    def mass(self, k: int) -> Fraction:
        """x(I): total value of the points inside interval ``k``."""
        a, b = self.span(k)
        return sum((v for _, v, _ in self.points[a:b]), Fraction(0))

    def masses(self) -> list:
        prefix = [Fraction(0)]
        for _, v, _ in self.points:
            prefix.append(prefix[-1] + v)
        return [prefix[b] - prefix[a] for a, b in self.spans()]

    def total_value(self) -> Fraction:
        return sum(self.values, Fraction(0))

    def weighted_value(self) -> Fraction:
        return sum((v * w for _, v, w in self.points), Fraction(0))

    def with_values(self, values: Sequence) -> "IntervalSystem":
        if len(values) != len(self.points):
            raise ValueError("value vector length does not match point count")
        return IntervalSystem(
            tuple((p, as_fraction(v), w) for (p, _, w), v in zip(self.points, values)),
            self.intervals,
        )

    def restrict(self, keep: Iterable[int]) -> "IntervalSystem":
        return IntervalSystem(self.points, tuple(self.intervals[k] for k in keep))


@dataclass(frozen=True)
class StabSolution:
    """A chosen set of lines (or point indices) with a per-demand witness.

    ``witness[k]`` is the chosen element covering demand ``k``; ``info``
    carries method-specific diagnostics such as thresholds and bounds.
    """

    chosen: tuple
    weight: Fraction
    witness: tuple
    info: dict = field(default_factory=dict, compare=False)


def maximal_cliques(intervals: Sequence) -> list:
    """Maximal cliques of closed intervals, left to right.

    Returns ``(members, lo, hi)`` triples where ``[lo, hi]`` is the common
    intersection of the members.
    """
    events = []
    for k, (lo, hi) in enumerate(intervals):
        events.append((lo, 0, k))
        events.append((hi, 1, k))
    events.sort(key=lambda e: (e[0], e[1]))
    active: set = set()
    cliques = []
    last_left = None
    prev_was_left = False
    for x, typ, k in events:
        if typ == 0:
            active.add(k)
            last_left = x
            prev_was_left = True
        else:
            if prev_was_left:
                cliques.append((tuple(sorted(active)), last_left, x))
            active.discard(k)
            prev_was_left = False
    return cliques


def discretize(rects: Sequence[Rect], kind: str = "rectstab") -> Instance:
    """Continuous-to-discrete reduction: one unit line per maximal clique.

    The line for a clique of x-projections is vertical and sits at the
    largest left endpoint in the clique; likewise for y.
    """
    rects = list(rects)
    if not rects:
        raise InvalidInstanceError("cannot discretize an empty rectangle set")
    vl = [Line(VERTICAL, lo) for _, lo, _ in maximal_cliques([r.projection("x") for r in rects])]
    hl = [Line(HORIZONTAL, lo) for _, lo, _ in maximal_cliques([r.projection("y") for r in rects])]
    return Instance(tuple(rects), tuple(hl), tuple(vl), kind=kind, weighted=False)


def project(instance: Instance, axis: str, values: Sequence | None = None) -> IntervalSystem:
    """Project onto the x axis (vertical lines) or the y axis (horizontal lines).

    Point ``k`` of the result is line ``("v", k)`` or ``("h", k)``; interval
    ``k`` is the projection of ``instance.rects[k]``.
    """
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    lines = instance.vlines if axis == "x" else instance.hlines
    if values is None:
        values = [Fraction(0)] * len(lines)
    pts = tuple((l.coord, as_fraction(v), l.weight) for l, v in zip(lines, values))
    return IntervalSystem(pts, tuple(r.projection(axis) for r in instance.rects))


# -- JSON ----------------------------------------------------------------------

def instance_to_dict(inst: Instance) -> dict:
    def rect(r):
        return {k: format_fraction(getattr(r, k)) for k in ("x1", "x2", "y1", "y2")}

    def line(l):
        return {"coord": format_fraction(l.coord), "w": format_fraction(l.weight)}

    return {
        "kind": inst.kind,
        "weighted": inst.weighted,
        "rects": [rect(r) for r in inst.rects],
        "hlines": [line(l) for l in inst.hlines],
        "vlines": [line(l) for l in inst.vlines],
    }


def instance_from_dict(data: dict) -> Instance:
    try:
        rects = [Rect(d["x1"], d["x2"], d["y1"], d["y2"]) for d in data["rects"]]
        hl = [Line(HORIZONTAL, d["coord"], d.get("w", 1)) for d in data.get("hlines", [])]
        vl = [Line(VERTICAL, d["coord"], d.get("w", 1)) for d in data.get("vlines", [])]
        kind = data.get("kind", "rectstab")
        weighted = data.get("weighted", False)
    except (KeyError, TypeError) as exc:
        raise InvalidInstanceError(f"malformed instance JSON: {exc}") from exc
    if not isinstance(weighted, bool):
        raise InvalidInstanceError("'weighted' must be a boolean")
    return Instance(tuple(rects), tuple(hl), tuple(vl), kind=kind, weighted=weighted)


def dumps(inst: Instance) -> str:
    """Canonical JSON: sorted keys, compact separators, trailing newline."""
    return json.dumps(instance_to_dict(inst), sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInstanceError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidInstanceError("instance JSON must be an object")
    return instance_from_dict(data)


def load(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(inst))
