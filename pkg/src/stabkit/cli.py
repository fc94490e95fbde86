"""Command-line entry point.

Exit codes: 0 success, 1 failed check, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import analysis, harness, model
from .errors import StabkitError
from .exact import brute_force_opt
from .lp import solve_relaxation
from .rounding import gaur_round, ks_round, segstab_round, unitsq_round


class UsageError(Exception):
    pass


def fmt(q) -> str:
    """``p/q`` plus a 12-significant-digit decimal."""
    if isinstance(q, Fraction):
        if q.denominator == 1:
            return str(q.numerator)
        return f"{q} ({float(q):.12g})"
    if isinstance(q, float):
        return "inf" if math.isinf(q) else f"{q:.12g}"
    return str(q)


def _enc(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, dict):
        return {str(k): _enc(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_enc(x) for x in v]
    return v


def _emit(args, payload: dict, lines: list) -> None:
    if args.json:
        print(json.dumps(_enc(payload), sort_keys=True))
    else:
        for line in lines:
            print(line)


def _load(path) -> model.Instance:
    try:
        return model.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _ref(r) -> str:
    return f"{r[0]}{r[1]}"


# -- subcommands ---------------------------------------------------------------------

def cmd_solve(args) -> int:
    inst = _load(args.input)
    sol = solve_relaxation(inst, "float" if args.float else "exact")
    if sol.status != "optimal":
        print(f"LP status: {sol.status}", file=sys.stderr)
        return 1
    refs = inst.line_refs()
    payload = {"status": sol.status, "lp_value": sol.objective,
               "values": {_ref(r): v for r, v in zip(refs, sol.values)}}
    lines = [f"z* = {fmt(sol.objective)}"]
    lines += [f"  {_ref(r)} @ {fmt(inst.line(r).coord)}: {fmt(v)}" for r, v in zip(refs, sol.values)]
    _emit(args, payload, lines)
    return 0


def cmd_round(args) -> int:
    inst = _load(args.input)
    lp = solve_relaxation(inst)
    mode = args.mode or ("best_k" if args.method == "ks" else "derandomized")
    if args.method == "gaur":
        sol = gaur_round(inst, lp)
    elif args.method == "ks":
        sol = ks_round(inst, lp, "random" if mode == "random" else "best_k", seed=args.seed)
    elif args.method == "segstab":
        sol = segstab_round(inst, lp, "random" if mode == "random" else "derandomized", seed=args.seed)
    else:
        sol = unitsq_round(inst, lp, "random" if mode == "random" else "derandomized", seed=args.seed)
    ratio = sol.weight / lp.objective if lp.objective else None
    payload = {"method": args.method, "lp_value": lp.objective, "weight": sol.weight,
               "ratio": ratio, "chosen": [_ref(r) for r in sol.chosen]}
    lines = [f"method = {args.method}", f"z* = {fmt(lp.objective)}", f"weight = {fmt(sol.weight)}"]
    if ratio is not None:
        lines.append(f"ratio = {fmt(ratio)}")
    lines.append("lines = " + " ".join(_ref(r) for r in sol.chosen))
    _emit(args, payload, lines)
    return 0


def cmd_exact(args) -> int:
    inst = _load(args.input)
    try:
        sol = brute_force_opt(inst, args.cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    payload = {"opt": sol.weight, "chosen": [_ref(r) for r in sol.chosen]}
    _emit(args, payload, [f"OPT = {fmt(sol.weight)}",
                          "lines = " + " ".join(_ref(r) for r in sol.chosen)])
    return 0


def _checks_out(args, checks) -> int:
    ok = all(c.passed for c in checks)
    payload = {"checks": [c.as_dict() for c in checks], "pass": ok}
    lines = [f"{'PASS' if c.passed else 'FAIL'} {c.check}: {fmt(c.value) if not isinstance(c.value, list) else [str(v) for v in c.value]}"
             f" (bound {fmt(c.bound) if not isinstance(c.bound, list) else c.bound})" for c in checks]
    _emit(args, payload, lines)
    return 0 if ok else 1


def _write_csv(path, header, rows) -> None:
    import csv

    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\r\n")
            wr.writerow(header)
            wr.writerows(rows)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_analyze(args) -> int:
    target = args.target
    C = analysis.Check
    if target == "mu-bar":
        p = analysis.MU_PARAMS
        z, v = analysis.mu_bar_max(p)
        checks = [
            C("mu_bar.max", v, analysis.SEGSTAB_BOUND, v < analysis.SEGSTAB_BOUND, {"argmax": z}),
            C("mu_bar.case1", analysis.mu_bar(p.alpha / 2, p), 1.835,
              abs(analysis.mu_bar(p.alpha / 2, p) - 1.835) <= 2e-3),
            C("mu_bar.at_beta", analysis.mu_bar(p.beta, p), 1.927,
              abs(analysis.mu_bar(p.beta, p) - 1.927) <= 2e-3),
            C("mu_bar.at_gamma", analysis.mu_bar(p.gamma, p), 1 / p.gamma,
              abs(analysis.mu_bar(p.gamma, p) - 1 / p.gamma) <= 1e-9),
            C("stationarity.bracket", analysis.stationarity(p.alpha, p.alpha, p.beta), 0.0,
              analysis.stationarity(p.alpha, p.alpha, p.beta) > 0 > analysis.stationarity(p.beta, p.alpha, p.beta),
              {"f_beta": analysis.stationarity(p.beta, p.alpha, p.beta), "z0": p.z0}),
        ]
        if args.csv:
            _write_csv(args.csv, ["z", "mu_bar"], [(repr(a), repr(b)) for a, b in analysis.mu_bar_curve()])
        return _checks_out(args, checks)
    if target == "limitation":
        v, tx, ty = analysis.limitation_grid_min(args.grid)
        mass = analysis.density_mass()
        checks = [C("limitation.grid_min", v, 1.885, v >= 1.885, {"tau_x": tx, "tau_y": ty, "grid": args.grid}),
                  C("limitation.density_mass", mass, Fraction(1), mass == 1)]
        if args.csv:
            _write_csv(args.csv, ["tau_x", "tau_y", "gamma"],
                       [(repr(a), repr(b), repr(c)) for a, b, c in analysis.limitation_curve()])
        return _checks_out(args, checks)
    if target == "recurrence":
        if args.k is None or args.k < 4:
            raise UsageError("analyze recurrence needs --k K with K >= 4")
        t = analysis.recurrence_table(args.k)
        payload = {"k": t.k, "gamma_star": t.gamma_star, "alpha3": t.alpha3,
                   "limit": analysis.gamma_star_limit(), "betas": [list(b) for b in t.betas]}
        lines = [f"gamma*({t.k}) = {fmt(t.gamma_star)}", f"alpha3 = {fmt(t.alpha3)}",
                 f"limit = {analysis.gamma_star_limit():.12g}"]
        if t.k == 5:
            # a value of 5/4 circulates for k = 5; the recurrence gives 8/5
            note = "k=5: recurrence gives 8/5, not 5/4 (A2 = 10, B2 = 1)"
            payload["note"] = note
            lines.append(f"note: {note}")
        _emit(args, payload, lines)
        return 0
    if target == "claims":
        return _checks_out(args, analysis.four_level_checks() + analysis.five_level_checks())
    if target == "lemma2":
        if args.window is None:
            raise UsageError("analyze lemma2 needs --window")
        try:
            bound = Fraction(args.claim_bound)
            v = analysis.lemma2_compose(bound, args.window)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        _emit(args, {"claim_bound": bound, "window": args.window, "bound": v},
              [f"bound = {fmt(v)}"])
        return 0
    if target == "audit":
        rep = analysis.random_config_audit(args.k or 4, args.window or 5, args.trials, args.seed)
        rep.pop("worst_config")
        c = C(f"audit.k{rep['k']}_w{rep['window']}", rep["max_gamma"], rep["bound"], rep["pass"],
              {"trials": rep["trials"], "seed": rep["seed"]})
        return _checks_out(args, [c])
    raise UsageError(f"unknown analyze target {target!r}")


def cmd_gen(args) -> int:
    if args.kind == "three-halves":
        inst = harness.gen_three_halves_lb()
    else:
        inst = harness.gen_random(args.kind, args.rects, args.lines, args.seed, args.weighted)
    text = model.dumps(inst)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc.strerror or exc}") from exc
    return 0


def cmd_gap(args) -> int:
    try:
        cfg = harness.ExperimentConfig.load(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc.strerror or exc}") from exc
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config {args.config}: {exc}") from exc
    if args.csv:
        cfg.out_csv = args.csv
    if args.json_out:
        cfg.out_json = args.json_out
    if args.seed is not None:
        cfg.seed = args.seed
    rep = harness.run_gap_experiment(cfg)
    lines = [f"rows = {len(rep['rows'])}"]
    for k, s in sorted(rep["summary"].items()):
        lines.append(f"{k}: max {s['max']:.12g} mean {s['mean']:.12g} (n={s['count']})")
    lines += [f"VIOLATION instance {v['instance_id']}: {v['message']}" for v in rep["violations"]]
    _emit(args, {"summary": rep["summary"], "violations": rep["violations"],
                 "rows": len(rep["rows"])}, lines)
    return 1 if rep["violations"] else 0


def cmd_verify(args) -> int:
    C = analysis.Check
    if args.target == "claim2":
        return _checks_out(args, analysis.four_level_checks())
    if args.target == "claim3":
        return _checks_out(args, analysis.five_level_checks())
    inst = harness.gen_three_halves_lb()
    lp = solve_relaxation(inst)
    opt = brute_force_opt(inst).weight
    us = unitsq_round(inst, lp).weight
    checks = [C("three_halves.lp", lp.objective, Fraction(2), lp.objective == 2),
              C("three_halves.opt", opt, Fraction(3), opt == 3),
              C("three_halves.unitsq_ratio", us / lp.objective, Fraction(3, 2), us / lp.objective == Fraction(3, 2))]
    if args.json:
        return _checks_out(args, checks)
    ok = all(c.passed for c in checks)
    print(f"LP={fmt(lp.objective)} OPT={fmt(opt)} unitsq={fmt(us)} ratio={fmt(us / lp.objective)}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


# -- parser -----------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stabkit", description="LP rounding for rectangle stabbing.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        return sp

    s = common(sub.add_parser("solve", help="solve the LP relaxation"))
    s.add_argument("-i", "--input", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--exact-arith", action="store_true", help="exact rational simplex (default)")
    g.add_argument("--float", action="store_true", help="floating-point simplex")
    s.set_defaults(func=cmd_solve)

    s = common(sub.add_parser("round", help="round the LP solution"))
    s.add_argument("-i", "--input", required=True)
    s.add_argument("--method", required=True, choices=["gaur", "ks", "segstab", "unitsq"])
    s.add_argument("--mode", choices=["random", "derand"])
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_round)

    s = common(sub.add_parser("exact", help="exact optimum by branch and bound"))
    s.add_argument("-i", "--input", required=True)
    s.add_argument("--cap", type=int, default=24, help="maximum number of lines")
    s.set_defaults(func=cmd_exact)

    s = common(sub.add_parser("analyze", help="numeric and exact certificates"))
    s.add_argument("target", choices=["mu-bar", "limitation", "recurrence", "claims", "lemma2", "audit"])
    s.add_argument("--k", type=int)
    s.add_argument("--window", type=int)
    s.add_argument("--claim-bound", default="19/12")
    s.add_argument("--grid", type=int, default=2001)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--csv", help="write the plotted curve to this CSV file")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("gen", help="generate an instance")
    s.add_argument("--kind", required=True,
                   choices=list(model.KINDS) + ["three-halves"])
    s.add_argument("--rects", type=int, default=8)
    s.add_argument("--lines", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--weighted", action="store_true")
    s.add_argument("-o", "--output", required=True, help="output path or - for stdout")
    s.set_defaults(func=cmd_gen)

    s = common(sub.add_parser("gap", help="run an integrality gap experiment"))
    s.add_argument("--config", required=True)
    s.add_argument("--csv")
    s.add_argument("--json-out")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_gap)

    s = common(sub.add_parser("verify", help="check a certificate"))
    s.add_argument("target", choices=["claim2", "claim3", "three-halves"])
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, StabkitError, ValueError) as exc:
        print(f"stabkit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
