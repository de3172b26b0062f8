import math

import numpy as np
import pytest

from conftest import make_params, random_params
from impulsegame import (ImpulseSchedule, solve_alpha1, solve_alpha2, solve_costate,
                         solve_lambda1, solve_lambda2, solve_m1, solve_m2, solve_offsets)
from oracles import costate_rk4, piece_value, value_coefficients_rk4


class TestLambda2:
    def test_no_running_weight(self):
        p = make_params(w2=0.0, s2=0.7, A=0.4, T=1.5)
        lam = solve_lambda2(p)
        ts = np.linspace(0, 1.5, 7)
        assert np.allclose(lam(ts), 0.7 * np.exp(0.4 * (1.5 - ts)), rtol=1e-14)

    def test_affine_limit(self):
        assert solve_lambda2(make_params(A=0.0, w2=1.0, s2=0.0))(0.0) == pytest.approx(1.0)

    def test_against_rk4(self):
        p = make_params(A=0.5, w2=1.0, s2=0.0)
        ref = piece_value(costate_rk4(0.5, 1.0, 0.0, 0.0, 1.0), 0.0)
        val = solve_lambda2(p)(0.0)
        assert val == pytest.approx(ref, abs=1e-12)
        assert val == pytest.approx(-2 + 2 * math.exp(0.5), abs=1e-14)

    def test_single_segment_no_jumps(self):
        lam = solve_lambda2(make_params())
        assert len(lam.segments) == 1 and lam.jumps == ()
        assert lam(1.0) == 0.0


class TestLambda1:
    def test_matches_lambda2_form_without_jumps(self):
        p = make_params(q1=0.0, w1=0.3, s1=-0.8)
        a = solve_lambda1(p)
        b = solve_lambda2(p.replace(w2=0.3, s2=-0.8))
        ts = np.linspace(0, 1, 11)
        assert np.array_equal(a(ts), b(ts))

    def test_jump_instance(self):
        p = make_params(A=0.5, w1=1.0, s1=1.0, q1=1.0)
        lam = solve_lambda1(p, [0.5])
        ref = piece_value(costate_rk4(0.5, 1.0, 1.0, 1.0, 1.0, [0.5]), 0.5, "left")
        assert lam(0.5, "left") == pytest.approx(ref, abs=1e-12)
        assert lam(0.5, "left") == pytest.approx(-2 + 3 * math.exp(0.25) + 1, abs=1e-14)
        assert lam(0.5, "right") == pytest.approx(-2 + 3 * math.exp(0.25), abs=1e-14)

    def test_homogeneous(self):
        p = make_params(A=1.0, w1=0.0, s1=0.0, q1=1.0)
        lam = solve_lambda1(p, [0.5])
        late = np.linspace(0.5, 1.0, 6)
        assert np.all(lam(late, "right") == 0.0)
        early = np.linspace(0.0, 0.45, 6)
        assert np.allclose(lam(early), np.exp(0.5 - early), rtol=1e-14)

    def test_aliases(self):
        p = make_params(A=-0.3, q1=0.4)
        ts = np.linspace(0, 1, 9)
        ref = solve_lambda1(p, [0.3, 0.6])(ts)
        for f in (solve_alpha1, solve_m1):
            assert np.array_equal(f(p, [0.3, 0.6])(ts), ref)
        for f in (solve_alpha2, solve_m2):
            assert np.array_equal(f(p)(ts), solve_lambda2(p)(ts))


class TestInvariants:
    @pytest.mark.parametrize("seed", range(5))
    def test_ode_residual(self, seed):
        rng = np.random.default_rng(seed)
        p = random_params(rng, A=rng.uniform(-1.5, 1.5))
        instants = sorted(rng.uniform(0.1, 0.9, size=2) * p.T)
        lam1 = solve_lambda1(p, instants)
        lam2 = solve_lambda2(p)
        ts = rng.uniform(0, p.T, 100)
        ts = ts[np.min(np.abs(ts[:, None] - np.r_[0, instants, p.T][None, :]), axis=1) > 1e-3]
        h = 1e-5
        for coef, w in ((lam1, p.w1), (lam2, p.w2)):
            for t in ts:
                seg = coef.segment_at(t)
                fd = (seg.evaluate(t + h) - seg.evaluate(t - h)) / (2 * h)
                rhs = -p.A * coef(t) - w
                assert fd == pytest.approx(rhs, rel=1e-6, abs=1e-8)

    def test_terminal_and_jumps(self):
        p = make_params(A=0.2, q1=-0.7, s1=0.3, s2=-0.4)
        inst = [0.25, 0.5, 0.75]
        lam1 = solve_lambda1(p, inst)
        assert lam1(1.0) == 0.3 and solve_lambda2(p)(1.0) == -0.4
        assert [j.instant for j in lam1.jumps] == inst
        for j in lam1.jumps:
            assert j.left - j.right == pytest.approx(-0.7, abs=1e-15)
        sched = ImpulseSchedule.from_pairs(inst, [0.1, 0.2, 0.3])
        b1, b2 = solve_offsets(p, lam1, solve_lambda2(p), sched)
        assert b1(1.0) == 0.0 and b2(1.0) == 0.0

    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_zero_rate_continuity(self, sign):
        p0 = make_params(A=0.0, q1=0.6, w1=0.9, s1=-0.2, w2=-1.1, s2=0.3)
        p1 = p0.replace(A=sign * 1e-8)
        inst = [0.4]
        sched = ImpulseSchedule.from_pairs(inst, [0.7])
        ts = np.linspace(0, 1, 201)
        for p in (p0, p1):
            a1 = solve_alpha1(p, inst)
            a2 = solve_alpha2(p)
            b1, b2 = solve_offsets(p, a1, a2, sched)
            if p is p0:
                ref = [f(ts) for f in (a1, a2, b1, b2)]
            else:
                for f, r in zip((a1, a2, b1, b2), ref):
                    assert np.max(np.abs(f(ts) - r)) < 1e-6

    def test_csv_export(self):
        lam = solve_lambda1(make_params(), [0.5])
        lines = lam.to_csv(n_per_segment=4).splitlines()
        assert lines[0] == "t,value,side"
        sides = [l.split(",")[2] for l in lines[1:]]
        assert sides.count("left") == 1 and sides.count("right") == 1


class TestOffsets:
    def test_zero_player1_weights(self):
        p = make_params(w1=0.0, s1=0.0, q1=0.0)
        a1 = solve_alpha1(p)
        b1, b2 = solve_offsets(p, a1, solve_alpha2(p), ImpulseSchedule())
        ts = np.linspace(0, 1, 11)
        assert np.all(b1(ts) == 0.0) and np.all(b2(ts) == 0.0)

    def test_value_matching_jump(self):
        # alpha2(tau+) = gamma = 0.5 with P2 = -1, Q = 1, C = -0.125: jump is exactly 0
        p = make_params(A=0.0, w2=1.0, s2=0.0, q1=0.0)
        tau, v = 0.5, 0.5
        sched = ImpulseSchedule.from_pairs([tau], [v])
        a2 = solve_alpha2(p)
        assert a2(tau) == 0.5
        _, b2 = solve_offsets(p, solve_alpha1(p, [tau]), a2, sched)
        (j,) = b2.jumps
        expected = a2(tau) * p.Q * v + 0.5 * p.P2 * v**2 + p.C
        assert expected == pytest.approx(-a2(tau) ** 2 * p.Q**2 / (2 * p.P2) + p.C)
        assert j.size == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("seed", range(4))
    def test_against_rk4(self, seed):
        rng = np.random.default_rng(100 + seed)
        p = random_params(rng)
        inst = sorted(rng.uniform(0.15, 0.85, size=2) * p.T)
        sched = ImpulseSchedule.from_pairs(inst, rng.uniform(-1, 1, size=2))
        a1, a2 = solve_alpha1(p, inst), solve_alpha2(p)
        b1, b2 = solve_offsets(p, a1, a2, sched)
        ref = value_coefficients_rk4(p, sched, n=2000)
        for t in (0.0, inst[0], inst[1]):
            for side in ("left", "right"):
                got = [f(t, side) for f in (a1, a2, b1, b2)]
                want = [piece_value(ref, t, side, c) for c in range(4)]
                assert np.allclose(got, want, atol=1e-8, rtol=0), (t, side)

    def test_beta2_kink(self):
        p = make_params(A=0.6, q1=0.8, B=1.3, R1=-0.7)
        tau = 0.45
        sched = ImpulseSchedule.from_pairs([tau], [0.3])
        a1, a2 = solve_alpha1(p, [tau]), solve_alpha2(p)
        _, b2 = solve_offsets(p, a1, a2, sched)
        gap = b2.derivative(tau, "right") - b2.derivative(tau, "left")
        assert gap == pytest.approx(-p.B**2 * p.q1 * a2(tau) / p.R1, rel=1e-12)
        # one-sided finite differences tell the same story
        h = 1e-6
        fd_r = (b2(tau + h, "right") - b2(tau, "right")) / h
        fd_l = (b2(tau, "left") - b2(tau - h)) / h
        assert fd_r - fd_l == pytest.approx(gap, rel=1e-4)

    def test_requires_alpha1_jump(self):
        p = make_params(q1=1.0)
        with pytest.raises(ValueError):
            solve_offsets(p, solve_alpha1(p), solve_alpha2(p),
                          ImpulseSchedule.from_pairs([0.5], [0.1]))


def test_costate_generic_name():
    c = solve_costate(0.1, 0.2, 0.3, 0.4, 2.0, [1.0], "y")
    assert c.name == "y" and c.breakpoints == (1.0,)
