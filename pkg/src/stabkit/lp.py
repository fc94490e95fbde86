"""Small dense-tableau simplex solver and the stabbing LP relaxation.

Two arithmetic modes share one implementation: ``"exact"`` runs the
simplex over :class:`~fractions.Fraction` with zero tolerance, ``"float"``
over ``float`` with an absolute tolerance of ``FLOAT_TOL``.  Pivoting uses
Bland's rule (lowest-index entering column, lowest-index leaving basic
variable among ratio ties), so results are deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .model import Instance, IntervalSystem, as_fraction

FLOAT_TOL = 1e-9

LE, EQ, GE = "<=", "=", ">="
OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass
class LinearProgram:
    """``sense`` objective ``c . x`` subject to ``rows`` and variable bounds.

    Each row is ``(coefficients, relation, rhs)``.  ``lower[j]`` may be
    ``None`` for a free variable; ``upper[j]`` may be ``None`` for no cap.
    """

    c: list
    rows: list = field(default_factory=list)
    sense: str = "min"
    lower: list | None = None
    upper: list | None = None
    names: list | None = None

    def __post_init__(self):
        n = len(self.c)
        if self.sense not in ("min", "max"):
            raise ValueError(f"bad sense {self.sense!r}")
        self.c = [as_fraction(v) for v in self.c]
        rows = []
        for coeffs, rel, rhs in self.rows:
            if len(coeffs) != n:
                raise ValueError(f"row has {len(coeffs)} coefficients, expected {n}")
            if rel not in (LE, EQ, GE):
                raise ValueError(f"bad relation {rel!r}")
            rows.append(([as_fraction(a) for a in coeffs], rel, as_fraction(rhs)))
        self.rows = rows
        self.lower = [Fraction(0)] * n if self.lower is None else [
            None if v is None else as_fraction(v) for v in self.lower]
        self.upper = [None] * n if self.upper is None else [
            None if v is None else as_fraction(v) for v in self.upper]
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("bound vectors do not match the variable count")
        if self.names is None:
            self.names = [f"x{j}" for j in range(n)]

    @property
    def n_vars(self) -> int:
        return len(self.c)

    def add_row(self, coeffs, rel, rhs) -> None:
        self.rows.append(([as_fraction(a) for a in coeffs], rel, as_fraction(rhs)))


@dataclass
class LPSolution:
    status: str
    values: tuple = ()
    objective: object = None
    max_violation: object = 0
    mode: str = "exact"
    pivots: int = 0


@dataclass
class VerificationReport:
    slacks: list
    violations: list
    max_violation: object
    objective: object
    ok: bool


# -- simplex core ----------------------------------------------------------------

class _Tableau:
    def __init__(self, rows, rhs, basis, conv, tol):
        self.rows = rows  # list of lists, length n_cols
        self.rhs = rhs
        self.basis = basis
        self.conv = conv
        self.tol = tol
        self.pivots = 0

    def pivot(self, r, j, obj):
        prow = self.rows[r]
        piv = prow[j]
        if piv != 1:
            inv = 1 / piv
            for k, a in enumerate(prow):
                if a:
                    prow[k] = a * inv
            self.rhs[r] = self.rhs[r] * inv
        nz = [k for k, a in enumerate(prow) if a]
        brhs = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[j]
            if f:
                for k in nz:
                    row[k] = row[k] - f * prow[k]
                self.rhs[i] = self.rhs[i] - f * brhs
                if self.tol:
                    row[j] = 0 * f
        f = obj[0][j]
        if f:
            red = obj[0]
            for k in nz:
                red[k] = red[k] - f * prow[k]
            obj[1] = obj[1] - f * brhs
            if self.tol:
                red[j] = 0 * f
        self.basis[r] = j
        self.pivots += 1

    def run(self, obj, allowed):
        """Minimise; ``obj = [reduced_costs, value]``.  Returns False if unbounded."""
        tol = self.tol
        while True:
            red = obj[0]
            enter = -1
            for j in allowed:
                if red[j] < -tol:
                    enter = j
                    break
            if enter < 0:
                return True
            best_r = -1
            best_ratio = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > tol:
                    ratio = self.rhs[i] / a
                    if (best_r < 0 or ratio < best_ratio - tol
                            or (abs(ratio - best_ratio) <= tol and self.basis[i] < self.basis[best_r])):
                        best_r, best_ratio = i, ratio
            if best_r < 0:
                return False
            self.pivot(best_r, enter, obj)


def _reduced(cost, tab):
    """Reduced-cost row and objective value of ``cost`` for the current basis."""
    red = list(cost)
    val = 0 * cost[0] if cost else tab.conv(0)
    for i, b in enumerate(tab.basis):
        cb = cost[b]
        if cb:
            row = tab.rows[i]
            for k, a in enumerate(row):
                if a:
                    red[k] = red[k] - cb * a
            val = val + cb * tab.rhs[i]
    # obj[1] tracks -(objective) in the pivot update convention
    return [red, -val]


def solve(lp: LinearProgram, mode: str = "exact") -> LPSolution:
    """Solve ``lp``; ``mode`` is ``"exact"`` (rational) or ``"float"``."""
    if mode in ("exact", "exact_rational"):
        conv, tol, mode = Fraction, 0, "exact"
    elif mode == "float":
        conv, tol = float, FLOAT_TOL
    else:
        raise ValueError(f"unknown mode {mode!r}")
    zero = conv(0)
    n = lp.n_vars

    # Columns for the shifted variables x' = x - lower (free vars split in two).
    colmap = []  # per original var: list of (col, sign)
    n_struct = 0
    for j in range(n):
        if lp.lower[j] is None:
            colmap.append([(n_struct, 1), (n_struct + 1, -1)])
            n_struct += 2
        else:
            colmap.append([(n_struct, 1)])
            n_struct += 1
    shift = [lp.lower[j] if lp.lower[j] is not None else Fraction(0) for j in range(n)]

    raw = []
    for coeffs, rel, rhs in lp.rows:
        row = [zero] * n_struct
        b = rhs - sum((a * s for a, s in zip(coeffs, shift)), Fraction(0))
        for j, a in enumerate(coeffs):
            if a:
                for col, sg in colmap[j]:
                    row[col] = conv(a * sg)
        raw.append((row, rel, b))
    for j in range(n):
        if lp.upper[j] is not None:
            row = [zero] * n_struct
            for col, sg in colmap[j]:
                row[col] = conv(sg)
            raw.append((row, LE, lp.upper[j] - shift[j]))

    rows, rhs, basis = [], [], []
    slack_col = n_struct
    art_cols = []
    pending = []
    for row, rel, b in raw:
        if b < 0:
            row = [-a for a in row]
            b = -b
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        pending.append((row, rel, b))
    n_slack = sum(1 for _, rel, _ in pending if rel != EQ)
    n_art = sum(1 for _, rel, _ in pending if rel != LE)
    width = n_struct + n_slack + n_art
    art_col = n_struct + n_slack
    for row, rel, b in pending:
        full = row + [zero] * (n_slack + n_art)
        if rel == LE:
            full[slack_col] = conv(1)
            basis.append(slack_col)
            slack_col += 1
        else:
            if rel == GE:
                full[slack_col] = conv(-1)
                slack_col += 1
            full[art_col] = conv(1)
            basis.append(art_col)
            art_cols.append(art_col)
            art_col += 1
        rows.append(full)
        rhs.append(conv(b))
    tab = _Tableau(rows, rhs, basis, conv, tol)

    if art_cols:
        cost1 = [zero] * width
        for a in art_cols:
            cost1[a] = conv(1)
        obj = _reduced(cost1, tab)
        tab.run(obj, range(width))
        if -obj[1] > tol:
            return LPSolution(INFEASIBLE, mode=mode, pivots=tab.pivots)
        art_set = set(art_cols)
        # Drive zero-level artificials out of the basis; drop redundant rows.
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] in art_set:
                row = tab.rows[i]
                j = next((k for k in range(n_struct + n_slack) if abs(row[k]) > tol), -1)
                if j >= 0:
                    tab.pivot(i, j, [[zero] * width, zero])
                else:
                    del tab.rows[i], tab.rhs[i], tab.basis[i]
                    continue
            i += 1
        keep = n_struct + n_slack
        for row in tab.rows:
            del row[keep:]
        width = keep

    cost2 = [zero] * width
    sgn = 1 if lp.sense == "min" else -1
    for j in range(n):
        for col, s in colmap[j]:
            cost2[col] = conv(lp.c[j] * s * sgn)
    obj = _reduced(cost2, tab)
    if not tab.run(obj, range(width)):
        return LPSolution(UNBOUNDED, mode=mode, pivots=tab.pivots)

    xs = [zero] * width
    for i, b in enumerate(tab.basis):
        xs[b] = tab.rhs[i]
    values = []
    for j in range(n):
        v = conv(shift[j])
        for col, s in colmap[j]:
            v = v + s * xs[col]
        if tol and abs(v) < tol:
            v = 0.0
        values.append(v)
    objective = sum((conv(cj) * v for cj, v in zip(lp.c, values)), zero)
    rep = verify_solution(lp, values, mode=mode)
    return LPSolution(OPTIMAL, tuple(values), objective, rep.max_violation, mode, tab.pivots)


def verify_solution(lp: LinearProgram, solution, mode: str | None = None) -> VerificationReport:
    """Recompute residuals of a candidate point.

    ``solution`` is an :class:`LPSolution` or a plain value vector.  Slacks
    are signed so that a negative slack is a violation.  Exact mode demands
    zero violation; float mode accepts ``FLOAT_TOL``.
    """
    if isinstance(solution, LPSolution):
        mode = mode or solution.mode
        values = solution.values
    else:
        values = solution
    mode = mode or ("exact" if all(isinstance(v, (int, Fraction)) for v in values) else "float")
    if len(values) != lp.n_vars:
        raise ValueError(f"solution has {len(values)} values, LP has {lp.n_vars} variables")
    exact = mode == "exact"
    conv = Fraction if exact else float
    vals = [conv(v) for v in values]
    slacks, violations = [], []
    for i, (coeffs, rel, rhs) in enumerate(lp.rows):
        lhs = sum((conv(a) * v for a, v in zip(coeffs, vals) if a), conv(0))
        r = conv(rhs)
        s = r - lhs if rel == LE else lhs - r if rel == GE else -abs(lhs - r)
        slacks.append(s)
        if s < 0:
            violations.append((f"row{i}", -s))
    for j, v in enumerate(vals):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo is not None and v < conv(lo):
            violations.append((f"lower{j}", conv(lo) - v))
        if hi is not None and v > conv(hi):
            violations.append((f"upper{j}", v - conv(hi)))
    worst = max((d for _, d in violations), default=conv(0))
    objective = sum((conv(c) * v for c, v in zip(lp.c, vals)), conv(0))
    ok = worst == 0 if exact else worst <= FLOAT_TOL
    if not exact:
        violations = [(name, d) for name, d in violations if d > FLOAT_TOL]
    return VerificationReport(slacks, violations, worst, objective, ok)


# -- stabbing relaxation ---------------------------------------------------------

def build_relaxation(instance: Instance) -> LinearProgram:
    """Covering LP: one [0, 1] variable per line (``instance.line_refs()``
    order), one ``>= 1`` row per rectangle."""
    refs = instance.line_refs()
    col = {r: k for k, r in enumerate(refs)}
    n = len(refs)
    rows = []
    for i in range(len(instance.rects)):
        coeffs = [Fraction(0)] * n
        for s in instance.stabbers(i):
            coeffs[col[s]] = Fraction(1)
        rows.append((coeffs, GE, 1))
    c = [instance.line(r).weight for r in refs]
    names = [f"{o}{k}" for o, k in refs]
    return LinearProgram(c, rows, "min", [Fraction(0)] * n, [Fraction(1)] * n, names)


def system_relaxation(system: IntervalSystem) -> LinearProgram:
    """One-orientation covering LP of an interval system (points hit intervals)."""
    n = len(system.points)
    rows = []
    for a, b in system.spans():
        rows.append(([Fraction(1) if a <= k < b else Fraction(0) for k in range(n)], GE, 1))
    return LinearProgram(system.weights, rows, "min", [Fraction(0)] * n, [Fraction(1)] * n)


def split_values(instance: Instance, values: Sequence) -> tuple[list, list]:
    """Split an LP vector (``line_refs`` order) into ``(x_vertical, y_horizontal)``."""
    nv = len(instance.vlines)
    return list(values[:nv]), list(values[nv:])


def solve_relaxation(instance: Instance, mode: str = "exact") -> LPSolution:
    return solve(build_relaxation(instance), mode)


# -- export -------------------------------------------------------------------------

def _dec(q) -> str:
    f = float(q)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return f"{f:.15g}"


def export_lp(lp: LinearProgram) -> str:
    """CPLEX LP text, rationals rendered with 15 significant digits."""

    def expr(coeffs):
        parts = []
        for a, name in zip(coeffs, lp.names):
            if not a:
                continue
            sign = "-" if a < 0 else "+"
            mag = abs(a)
            term = name if mag == 1 else f"{_dec(mag)} {name}"
            parts.append(f"{sign} {term}")
        if not parts:
            return "0 " + lp.names[0] if lp.names else "0"
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else s

    out = ["Minimize" if lp.sense == "min" else "Maximize", f" obj: {expr(lp.c)}", "Subject To"]
    for i, (coeffs, rel, rhs) in enumerate(lp.rows):
        out.append(f" c{i}: {expr(coeffs)} {rel} {_dec(rhs)}")
    out.append("Bounds")
    for j, name in enumerate(lp.names):
        lo, hi = lp.lower[j], lp.upper[j]
        lo_s = "-inf" if lo is None else _dec(lo)
        if hi is None:
            out.append(f" {name} >= {lo_s}" if lo is not None else f" {name} free")
        else:
            out.append(f" {lo_s} <= {name} <= {_dec(hi)}")
    out.append("End")
    return "\n".join(out) + "\n"


def objective_delta(lp: LinearProgram, base: Sequence, perturbed: Sequence) -> float:
    """Objective change between two points, in float arithmetic."""
    return math.fsum(float(c) * (float(b) - float(a)) for c, a, b in zip(lp.c, base, perturbed))
