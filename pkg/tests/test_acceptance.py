"""Acceptance gate: the ten release criteria at their stated tolerances.

Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line before asserting.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from stabkit import analysis as A
from stabkit import harness as H
from stabkit.exact import brute_force_opt, min_weight_hitting, optimal_net, random_net
from stabkit.lp import solve, solve_relaxation, system_relaxation
from stabkit.model import IntervalSystem
from stabkit.rounding import gaur_round, ks_round, segstab_round, unitsq_round

F = Fraction
P = A.MU_PARAMS


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def _feasible(inst, sol):
    cs = set(sol.chosen)
    return all(any(s in cs for s in inst.stabbers(i)) for i in range(len(inst.rects)))


def test_criterion_01_mu_bar_reproduction(report):
    t0 = time.perf_counter()
    z, v = A.mu_bar_max()
    c1 = A.mu_bar(0.1)
    cb = A.mu_bar(P.beta)
    cg = A.mu_bar(P.gamma)
    diff = max(abs(A.mu_bar(x) - A.mu_bar(x, method="quadrature")) for x in np.linspace(0, 1, 1001))
    elapsed = time.perf_counter() - t0
    ok = (1.9340 <= v < 1.9350 and abs(z - 0.414) <= 2e-3 and abs(c1 - 1.835) <= 2e-3
          and abs(cb - 1.927) <= 2e-3 and abs(cg - 1 / P.gamma) <= 1e-9 and diff <= 1e-8
          and elapsed < 10)
    report(1, ok, f"max {v:.6f} at z={z:.5f}; case1 {c1:.5f}; beta {cb:.5f}; gamma {cg:.9f}; "
                  f"closed-vs-quad {diff:.2e}; {elapsed:.2f}s")


def test_criterion_02_four_level_certificate(report):
    main = A.clique_depth_value(A.FOUR_LEVEL_CLIQUES, A.FOUR_LEVEL_BETA)
    case1 = {c.check: c for c in A.four_level_checks()}["four_level.case1"].value
    ok = main == F(19, 12) and case1 <= F(19, 12)
    report(2, ok, f"depth over M = {main}; case 1 = {case1}")


def test_criterion_03_five_level_cases(report):
    checks = [c for c in A.five_level_checks() if c.check.startswith("five_level.case")]
    sums_ok = all(c.detail.get("level4_sum", 1) == 1 and c.detail.get("level5_sum", 1) == 1 for c in checks)
    ok = all(c.passed and c.value <= F(8, 5) for c in checks) and sums_ok
    report(3, ok, "; ".join(f"{c.check.split('.', 1)[1]}={c.value}" for c in checks))


def test_criterion_04_recurrence(report):
    g4, g5, g60 = A.gamma_star(4), A.gamma_star(5), A.gamma_star(60)
    dev = abs(float(g60) - (35 - math.sqrt(5)) / 20)
    Aseq, Bseq = A.integer_sequences(80)
    closed = all(A.closed_form_A(l) == Aseq[l] and A.closed_form_B(l) * 2 == 2 * Bseq[l] for l in range(81))
    ok = g4 == F(19, 12) and g5 == F(8, 5) and dev <= 1e-9 and closed
    report(4, ok, f"gamma*(4)={g4} gamma*(5)={g5} |gamma*(60)-limit|={dev:.1e} closed forms to 80: {closed}")


def test_criterion_05_limitation(report):
    v, tx, ty = A.limitation_grid_min(2001)
    mass = A.density_mass()
    ok = v >= 1.885 and mass == 1
    report(5, ok, f"grid min {v:.6f} at ({tx}, {ty}); integral of f = {mass}")


def test_criterion_06_three_halves(report):
    inst = H.gen_three_halves_lb()
    lp = solve_relaxation(inst)
    opt = brute_force_opt(inst).weight
    ratio = unitsq_round(inst, lp).weight / lp.objective
    ok = lp.objective == 2 and opt == 3 and ratio == F(3, 2)
    report(6, ok, f"LP {lp.objective}, OPT {opt}, unitsq ratio {ratio}")


def test_criterion_07_rounding_guarantees(report):
    n = 500
    bad = []
    e_ratio = math.e / (math.e - 1)
    for s in range(n):
        weighted = s % 2 == 1
        for kind in ("rectstab", "horizsegstab", "segstab", "unitsqrstab"):
            inst = H.gen_random(kind, 24, 10, (7, s), weighted and kind != "unitsqrstab")
            assert inst.n_lines <= 12
            lp = solve_relaxation(inst)
            z = lp.objective
            opt = brute_force_opt(inst).weight
            sols = {"gaur": gaur_round(inst, lp)}
            if kind == "horizsegstab":
                sols["ks"] = ks_round(inst, lp)
            if kind in ("segstab", "horizsegstab"):
                sols["segstab"] = segstab_round(inst, lp)
            if kind == "unitsqrstab":
                sols["unitsq"] = unitsq_round(inst, lp)
            limits = {"gaur": 2.0, "ks": e_ratio, "segstab": 1.935, "unitsq": 119 / 60}
            for name, sol in sols.items():
                if not _feasible(inst, sol) or sol.weight < opt or opt < z:
                    bad.append((kind, s, name, "infeasible or sandwich"))
                slack = 1e-9 if name == "ks" else 0.0
                if float(sol.weight) > limits[name] * float(z) + slack:
                    bad.append((kind, s, name, float(sol.weight / z)))
            if kind == "unitsqrstab" and sols["unitsq"].weight > F(119, 60) * z:
                bad.append((kind, s, "unitsq-exact", sols["unitsq"].weight / z))
    report(7, not bad, f"{n} instances per kind (gaur on all 4 kinds), violations {bad[:3]}")


def test_criterion_08_nets(report):
    rng = np.random.default_rng(8)
    bound_bad = 0
    for _ in range(500):
        m = int(rng.integers(1, 9))
        pos = sorted({F(int(v), 4) for v in rng.integers(0, 40, size=m)})
        pts = tuple((p, F(int(rng.integers(0, 9)), 8), F(int(rng.integers(1, 4)))) for p in pos)
        ivs = []
        for _ in range(int(rng.integers(0, 7))):
            p = pos[int(rng.integers(0, len(pos)))]
            ivs.append((p - F(int(rng.integers(0, 9)), 4), p + F(int(rng.integers(0, 9)), 4)))
        system = IntervalSystem(pts, tuple(ivs))
        eps = F(int(rng.integers(1, 9)), 8)
        if optimal_net(system, eps).weight > system.weighted_value() / eps:
            bound_bad += 1
    vals = [F(1, 3), F(1, 4), F(1, 2), F(1, 6), F(2, 3), F(3, 8), F(1, 8)]
    system = IntervalSystem(tuple((k, v, 1) for k, v in enumerate(vals)), ((0, 2), (1, 3), (2, 4), (4, 6), (6, 6)))
    eps = F(1, 2)
    audit = H.net_frequency_audit(system, eps, 100_000)
    exact_ok = all(all(w is not None for w in random_net(system, eps, s).witness) for s in range(500))
    cross = H.crossing_frequency(2, 5, 100_000, 8)
    ok = (bound_bad == 0 and audit["infeasible"] == 0 and exact_ok and audit["max_dev"] <= 0.01
          and abs(cross - 0.4) <= 0.02)
    report(8, ok, f"net bound violations {bound_bad}; infeasible draws {audit['infeasible']}/100000; "
                  f"max freq dev {audit['max_dev']:.4f}; crossing freq {cross:.4f}")


def test_criterion_09_psi_bar_audits(report):
    reps = [H.psi_audit(w, 10_000, seed=9) for w in (2, 5, 6, None)]
    ok = all(r["violations"] == 0 for r in reps)
    report(9, ok, "; ".join(f"[0,{r['window'] or 'inf'}] max {float(r['max_ratio']):.4f} <= "
                            f"{r['bound']}, violations {r['violations']}" for r in reps))


def test_criterion_10_tu_exactness(report):
    rng = np.random.default_rng(10)
    mismatches = 0
    for _ in range(1000):
        m = int(rng.integers(1, 9))
        pos = sorted({F(int(v), 2) for v in rng.integers(0, 20, size=m)})
        pts = tuple((p, F(0), F(int(rng.integers(1, 6)))) for p in pos)
        ivs = []
        for _ in range(int(rng.integers(1, 8))):
            p = pos[int(rng.integers(0, len(pos)))]
            ivs.append((p - F(int(rng.integers(0, 7)), 2), p + F(int(rng.integers(0, 7)), 2)))
        system = IntervalSystem(pts, tuple(ivs))
        if solve(system_relaxation(system), "exact").objective != min_weight_hitting(system).weight:
            mismatches += 1
    report(10, mismatches == 0, f"1000 systems, LP != DP on {mismatches}")
