import math

import numpy as np
import pytest

from conftest import make_params, random_params
from impulsegame import (BoundaryDegenerate, classify_fne_regime, evaluate_value2,
                         fne_candidate_times, fne_impulse_levels, gamma, solve_alpha1,
                         solve_endogenous_fne)
from impulsegame.fne import apply_R_operator, best_impulse_level
from impulsegame.serialization import alpha2_band_csv
from oracles import fne_times_by_root, r_operator_numeric


class TestGamma:
    def test_values(self):
        assert gamma(make_params()) == 0.5
        assert gamma(make_params(P2=-2.0, C=-1.0, Q=2.0)) == 1.0

    def test_monotone_in_cost(self):
        gs = [gamma(make_params(C=-c)) for c in (1e-6, 1e-3, 0.1, 1.0)]
        assert gs == sorted(gs) and gs[0] < 2e-3


class TestCandidates:
    def test_one_impulse(self, shared):
        t1, t2 = fne_candidate_times(shared)
        r1, r2, _ = fne_times_by_root(shared)
        assert t1 == pytest.approx(1 - 2 * math.log(1.25), abs=1e-14)
        assert t1 == pytest.approx(r1, abs=1e-10)
        assert t2 is None and r2 is None
        assert 1 - 2 * math.log(0.75) > 1.0

    def test_zero_drift(self):
        t1, t2 = fne_candidate_times(make_params(A=0.0))
        assert t1 == pytest.approx(0.5, abs=1e-15) and t2 is None

    def test_no_weights(self):
        assert fne_candidate_times(make_params(w2=0.0, s2=0.0)) == (None, None)

    def test_boundary(self):
        with pytest.raises(BoundaryDegenerate):
            fne_candidate_times(make_params(s2=0.5))  # alpha2(T) = gamma
        with pytest.raises(BoundaryDegenerate):
            fne_candidate_times(make_params(A=0.0, w2=0.0, s2=0.5))  # flat at gamma

    @pytest.mark.parametrize("seed", range(3))
    def test_root_oracle_random(self, seed):
        rng = np.random.default_rng(seed)
        hits = 0
        for _ in range(150):
            p = random_params(rng)
            try:
                t1, t2 = fne_candidate_times(p)
            except BoundaryDegenerate:
                continue
            r1, r2, _ = fne_times_by_root(p)
            for got, ref in ((t1, r1), (t2, r2)):
                assert (got is None) == (ref is None)
                if got is not None:
                    hits += 1
                    assert got == pytest.approx(ref, abs=1e-9)
        assert hits > 10

    def test_timing_ignores_player1(self, shared):
        ref = fne_candidate_times(shared)
        for kw in (dict(w1=-3.0), dict(s1=7.0), dict(q1=-2.0), dict(R1=-9.0), dict(B=4.0)):
            assert fne_candidate_times(shared.replace(**kw)) == ref


class TestLevels:
    def test_unit(self):
        assert fne_impulse_levels(make_params(), (0.3, 0.7)) == (0.5, -0.5)

    def test_negative_gain(self):
        assert fne_impulse_levels(make_params(Q=-1.0), (0.3, None))[0] == -0.5

    def test_maximizer_sign_by_numeric_search(self, shared):
        sol = solve_endogenous_fne(shared)
        tau = sol.schedule.instants[0]
        value = lambda y: evaluate_value2(shared, sol, tau, y, "right")
        best, v = r_operator_numeric(shared.P2, shared.C, shared.Q, value, 0.3)
        assert v == pytest.approx(sol.schedule.levels[0], abs=1e-8)
        assert best == pytest.approx(apply_R_operator(shared, sol, tau, 0.3, "right"), abs=1e-12)


class TestClassification:
    def test_tau1_only(self, shared):
        r = classify_fne_regime(shared)
        assert (r.k, r.interior, r.label) == (1, "tau1", "tau1-only/(c)/1")
        g, A = 0.5, 0.5
        margin = 1 - math.exp(-A) - A * g * math.exp(-A)
        assert margin == pytest.approx(0.3935 - 0.1516, abs=1e-4)
        assert margin in [pytest.approx(m) for m in r.margins]

    def test_tau2_only(self):
        r = classify_fne_regime(make_params(A=0.0, s2=-1.0))
        assert (r.k, r.interior) == (1, "tau2")
        assert r.label.startswith("tau2-only/(a)")
        assert fne_candidate_times(make_params(A=0.0, s2=-1.0))[1] == pytest.approx(0.5)

    def test_not_two_with_short_horizon(self):
        assert classify_fne_regime(make_params(A=0.0, s2=-0.6)).k == 1

    def test_two(self, two_impulse):
        r = classify_fne_regime(two_impulse)
        assert (r.k, r.interior, r.tau1_first) == (2, "both", True)
        assert r.label.startswith("two/(a)")

    def test_ordering_follows_slope(self):
        p = make_params(A=0.0, w2=-1.0, s2=0.55, T=2.0)
        r = classify_fne_regime(p)
        t1, t2 = fne_candidate_times(p)
        assert r.k == 2 and not r.tau1_first and t2 < t1

    def test_ten_thousand_draws_agree(self):
        rng = np.random.default_rng(2024)
        kinds = set()
        for _ in range(10_000):
            p = random_params(rng)
            try:
                r = classify_fne_regime(p)  # raises on disagreement
            except BoundaryDegenerate:
                continue
            kinds.add(r.interior)
            assert r.k <= 2
        assert kinds == {"neither", "tau1", "tau2", "both"}

    def test_same_sign_gives_one(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            for _ in range(100):
                p = random_params(rng)
                sign = rng.choice([-1.0, 1.0])
                p = p.replace(w2=sign * abs(p.w2), s2=sign * abs(p.s2))
                try:
                    r = classify_fne_regime(p)
                except BoundaryDegenerate:
                    continue
                assert r.k <= 1


class TestSolve:
    def test_worked_instance(self, fne_worked):
        sol = solve_endogenous_fne(fne_worked)
        assert sol.k == 1
        assert sol.schedule.instants[0] == pytest.approx(1 - 2 * math.log(1.25), abs=1e-14)
        assert sol.schedule.levels[0] == 0.5
        tau = sol.schedule.instants[0]
        assert len(sol.u.jumps) == 1
        gap = sol.u(tau, "left") - sol.u(tau, "right")
        assert gap == pytest.approx(-fne_worked.B * fne_worked.q1 / fne_worked.R1, abs=1e-14)

    def test_no_weights_matches_impulse_free(self):
        p = make_params(w2=0.0, s2=0.0)
        sol = solve_endogenous_fne(p)
        ts = np.linspace(0, 1, 21)
        assert sol.k == 0
        assert np.array_equal(sol.u(ts), (-p.B / p.R1) * solve_alpha1(p)(ts))

    def test_two_impulses(self, two_impulse):
        sol = solve_endogenous_fne(two_impulse)
        assert sol.k == 2
        assert np.allclose(sol.schedule.instants, (0.95, 1.95), atol=1e-14)
        assert sol.schedule.levels == (0.5, -0.5)
        assert [j.instant for j in sol.alpha1.jumps] == list(sol.schedule.instants)

    def test_level_constancy(self):
        rng = np.random.default_rng(9)
        seen = 0
        for _ in range(400):
            p = random_params(rng)
            try:
                sol = solve_endogenous_fne(p)
            except BoundaryDegenerate:
                continue
            mag = math.sqrt(2 * p.C / p.P2)
            for t, v in zip(sol.schedule.instants, sol.schedule.levels):
                seen += 1
                assert abs(v) == pytest.approx(mag, rel=1e-12)
                assert v == pytest.approx(best_impulse_level(p, sol, t), abs=1e-10)
            if sol.k == 2:
                assert sol.schedule.levels[0] == -sol.schedule.levels[1]
        assert seen > 20

    def test_json_and_bands(self, shared):
        sol = solve_endogenous_fne(shared)
        d = sol.to_dict()
        assert d["k"] == 1 and d["gamma"] == 0.5 and d["regime"]["label"] == "tau1-only/(c)/1"
        lines = alpha2_band_csv(sol).splitlines()
        assert lines[0] == "t,alpha2,lower,upper,side"
        assert lines[1].split(",")[2:4] == ["-0.5", "0.5"]


class TestValueFunctions:
    def test_value_matching(self, shared):
        sol = solve_endogenous_fne(shared)
        tau = sol.schedule.instants[0]
        for x in np.random.default_rng(0).uniform(-3, 3, 10):
            for side in ("left", "right"):
                gap = evaluate_value2(shared, sol, tau, x, side) - apply_R_operator(
                    shared, sol, tau, x, side)
                assert abs(gap) <= 1e-10

    def test_continuation_gap(self, shared):
        sol = solve_endogenous_fne(shared)
        for t in np.linspace(0.6, 1.0, 9):
            a2 = sol.alpha2(t)
            assert abs(a2) < sol.gamma
            gap = evaluate_value2(shared, sol, t, 1.0) - apply_R_operator(shared, sol, t, 1.0)
            assert gap == pytest.approx(-shared.C + shared.Q**2 * a2**2 / (2 * shared.P2))
            assert gap > 0

    def test_gap_sign_matches_band(self, two_impulse):
        sol = solve_endogenous_fne(two_impulse)
        for t in np.linspace(0, 2, 81):
            if any(abs(t - s) < 1e-9 for s in sol.schedule.instants):
                continue
            gap = evaluate_value2(two_impulse, sol, t, 0.0) - apply_R_operator(
                two_impulse, sol, t, 0.0)
            assert (gap > 0) == (abs(sol.alpha2(t)) < sol.gamma)

    def test_zero_slope(self):
        p = make_params(w2=0.0, s2=0.0)
        sol = solve_endogenous_fne(p)
        gap = evaluate_value2(p, sol, 0.4, 2.0) - apply_R_operator(p, sol, 0.4, 2.0)
        assert gap == -p.C

    def test_numeric_R_operator(self, two_impulse):
        sol = solve_endogenous_fne(two_impulse)
        p = two_impulse
        for t in (0.3, 1.2, 1.9):
            for x in (-1.0, 0.5):
                value = lambda y: evaluate_value2(p, sol, t, y)
                best, _ = r_operator_numeric(p.P2, p.C, p.Q, value, x)
                assert best == pytest.approx(apply_R_operator(p, sol, t, x), abs=1e-10)

    def test_value_consistency(self, shared, two_impulse):
        for p in (shared, two_impulse, make_params(x0=1.7, A=-0.8, w2=2.0, s2=-0.3)):
            sol = solve_endogenous_fne(p)
            assert sol.payoffs.J1 == pytest.approx(
                sol.alpha1(0.0, "right") * p.x0 + sol.beta1(0.0, "right"), abs=1e-6)
            assert sol.payoffs.J2 == pytest.approx(
                sol.alpha2(0.0) * p.x0 + sol.beta2(0.0, "right"), abs=1e-6)
