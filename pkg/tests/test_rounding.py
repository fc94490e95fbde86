import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stabkit import harness
from stabkit.errors import KindError
from stabkit.exact import brute_force_opt, psi_profile
from stabkit.lp import solve_relaxation
from stabkit.model import HORIZONTAL, VERTICAL, Instance, Line, Rect, project
from stabkit.rounding import (DEFAULT_SCHEDULE, SegStabRounder, ThresholdSchedule, UnitSquareRounder,
                              gaur_round, ks_round, lp_vectors, segstab_round, unitsq_round)

F = Fraction
seeds = st.integers(0, 10 ** 6)


def _feasible(inst, sol):
    cs = set(sol.chosen)
    return all(any(s in cs for s in inst.stabbers(i)) for i in range(len(inst.rects)))


def test_schedule_constants():
    s = DEFAULT_SCHEDULE
    assert s.h(s.alpha) == s.gamma_thr == F(179, 300)
    assert s.h(s.beta) == s.beta
    assert s.h_inverse(s.gamma_thr) == s.alpha
    assert s.cdf(s.alpha) == 0 and s.cdf(s.beta) == 1


def test_schedule_density_integrates_to_one():
    from scipy.integrate import quad
    val, _ = quad(DEFAULT_SCHEDULE.density, 0.25, 0.45)
    assert abs(val - 1) < 1e-12


def test_schedule_samples_follow_cdf():
    rng = np.random.default_rng(0)
    xs = np.array([float(DEFAULT_SCHEDULE.sample(rng)) for _ in range(20000)])
    assert xs.min() >= 0.25 and xs.max() <= 0.45
    # P(t <= 0.35) = ((0.35 - 0.25) / 0.2)^2 = 1/4
    assert abs((xs <= 0.35).mean() - 0.25) < 0.015


def test_schedule_validation():
    with pytest.raises(ValueError):
        ThresholdSchedule(F(1, 2), F(1, 4))


def test_gaur_on_three_halves():
    inst = harness.gen_three_halves_lb()
    lp = solve_relaxation(inst)
    sol = gaur_round(inst, lp)
    assert sol.weight == 3 and _feasible(inst, sol)


def test_lp_vectors_length_check():
    inst = harness.gen_three_halves_lb()
    with pytest.raises(ValueError):
        lp_vectors(inst, [0, 0])


def test_wrong_kind_raises():
    inst = harness.gen_three_halves_lb()
    lp = solve_relaxation(inst)
    with pytest.raises(KindError):
        ks_round(inst, lp)
    with pytest.raises(KindError):
        segstab_round(inst, lp)
    rect = harness.gen_random("rectstab", 5, 6, 0)
    with pytest.raises(KindError):
        unitsq_round(rect, solve_relaxation(rect))


@given(st.sampled_from(["rectstab", "segstab", "horizsegstab", "unitsqrstab"]), seeds, st.booleans())
def test_gaur_feasible_within_twice_lp(kind, seed, weighted):
    inst = harness.gen_random(kind, 20, 10, seed, weighted and kind != "unitsqrstab")
    lp = solve_relaxation(inst)
    sol = gaur_round(inst, lp)
    assert _feasible(inst, sol)
    assert sol.weight <= 2 * lp.objective


@given(seeds, st.booleans())
def test_ks_best_k_guarantee(seed, weighted):
    inst = harness.gen_random("horizsegstab", 20, 10, seed, weighted)
    lp = solve_relaxation(inst)
    sol = ks_round(inst, lp)
    assert _feasible(inst, sol)
    assert float(sol.weight) <= math.e / (math.e - 1) * float(lp.objective) + 1e-9
    # the returned set is never worse than the best analytic prefix bound
    assert sol.weight <= sol.info["bound_min"]


@given(seeds, seeds)
def test_ks_random_is_feasible_and_under_its_bound(seed, s2):
    inst = harness.gen_random("horizsegstab", 15, 10, seed, True)
    lp = solve_relaxation(inst)
    sol = ks_round(inst, lp, "random", seed=s2)
    assert _feasible(inst, sol)
    assert sol.weight <= sol.info["bound"]
    assert 0 <= sol.info["tau"] <= 1 - F(math.exp(-1))


@given(st.sampled_from(["segstab", "horizsegstab"]), seeds, st.booleans(),
       st.integers(0, 8), st.integers(0, 8))
def test_segstab_weight_never_exceeds_threshold_bound(kind, seed, weighted, i, j):
    inst = harness.gen_random(kind, 20, 10, seed, weighted)
    r = SegStabRounder(inst, solve_relaxation(inst))
    tx, ty = F(i, 8), F(j, 8)
    sol = r.evaluate(tx, ty)
    assert _feasible(inst, sol)
    assert sol.weight <= r.bound(tx, ty)


@given(st.sampled_from(["segstab", "horizsegstab"]), seeds, st.booleans(), seeds)
def test_segstab_modes(kind, seed, weighted, s2):
    inst = harness.gen_random(kind, 20, 10, seed, weighted)
    lp = solve_relaxation(inst)
    d = segstab_round(inst, lp, "derandomized")
    r = segstab_round(inst, lp, "random", seed=s2)
    assert _feasible(inst, d) and _feasible(inst, r)
    assert float(d.weight) <= 1.935 * float(lp.objective)
    assert d.weight <= r.weight or d.weight <= segstab_round(inst, lp, "derand").weight


def test_segstab_random_thresholds_pair_with_h():
    inst = harness.gen_random("segstab", 10, 8, 3)
    lp = solve_relaxation(inst)
    sol = segstab_round(inst, lp, "random", seed=11)
    tx, ty = sol.info["tau_x"], sol.info["tau_y"]
    t = min(tx, ty)
    assert DEFAULT_SCHEDULE.alpha <= t <= DEFAULT_SCHEDULE.beta
    assert max(tx, ty) == DEFAULT_SCHEDULE.h(t)


def test_segstab_unknown_mode():
    inst = harness.gen_random("segstab", 5, 6, 0)
    with pytest.raises(ValueError):
        segstab_round(inst, solve_relaxation(inst), "sometimes")


def test_unitsq_three_halves_is_tight():
    inst = harness.gen_three_halves_lb()
    lp = solve_relaxation(inst)
    sol = unitsq_round(inst, lp)
    assert sol.weight / lp.objective == F(3, 2)
    assert brute_force_opt(inst).weight == sol.weight


@given(seeds, seeds)
def test_unitsq_derandomized_beats_net_integrals(seed, s2):
    inst = harness.gen_random("unitsqrstab", 12, 10, seed)
    lp = solve_relaxation(inst)
    d = unitsq_round(inst, lp)
    x, y = lp_vectors(inst, lp)
    bound = psi_profile(project(inst, "x", x)).psi_bar + psi_profile(project(inst, "y", y)).psi_bar
    assert _feasible(inst, d)
    assert d.weight <= bound
    assert d.weight <= F(119, 60) * lp.objective
    r = unitsq_round(inst, lp, "random", seed=s2)
    assert _feasible(inst, r) and d.weight <= r.weight


def test_unitsq_breakpoints_cover_both_axes():
    inst = harness.gen_three_halves_lb()
    r = UnitSquareRounder(inst, solve_relaxation(inst))
    assert r.breakpoints() == [0, F(1, 2), 1]


def test_unitsq_rejects_weighted():
    inst = Instance((Rect(0, 1, 0, 1),), (), (Line(VERTICAL, 0, 2),), kind="unitsqrstab", weighted=True)
    with pytest.raises(KindError):
        unitsq_round(inst, [1])
