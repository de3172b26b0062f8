"""Costates and value-function coefficients.

Both players' adjoint variables (open loop) and value-function slopes
(feedback) obey y' = -A y - w backward from a salvage slope, with a jump of
``q`` (left minus right) at each impulse instant. The open-loop and feedback
names below are aliases of that one recursion.
"""

from __future__ import annotations

from typing import Sequence

from .model import GameParameters, ImpulseSchedule
from .segments import (ExponentialSegment, Jump, OffsetSegment, PiecewiseCoefficient,
                       merged_breaks)


def solve_costate(A: float, w: float, s: float, q: float, T: float,
                  instants: Sequence[float] = (), name: str = "") -> PiecewiseCoefficient:
    """Backward recursion: y(T) = s, y(tau-) = y(tau+) + q at each instant."""
    bounds = [0.0, *instants, T]
    segments = []
    jumps = []
    end_value = s
    for t0, t1 in reversed(list(zip(bounds, bounds[1:]))):
        seg = ExponentialSegment(t0, t1, end_value, w, A)
        segments.append(seg)
        if t0 > 0.0:
            right = float(seg.evaluate(t0))
            jumps.append(Jump(t0, right + q, right))
            end_value = right + q
    return PiecewiseCoefficient(tuple(reversed(segments)), tuple(reversed(jumps)), name)


def solve_lambda2(p: GameParameters) -> PiecewiseCoefficient:
    return solve_costate(p.A, p.w2, p.s2, 0.0, p.T, (), "lambda2")


def solve_lambda1(p: GameParameters, instants: Sequence[float] = ()) -> PiecewiseCoefficient:
    return solve_costate(p.A, p.w1, p.s1, p.q1, p.T, tuple(instants), "lambda1")


def solve_alpha1(p: GameParameters, instants: Sequence[float] = ()) -> PiecewiseCoefficient:
    return solve_costate(p.A, p.w1, p.s1, p.q1, p.T, tuple(instants), "alpha1")


def solve_m1(p: GameParameters, instants: Sequence[float] = ()) -> PiecewiseCoefficient:
    return solve_costate(p.A, p.w1, p.s1, p.q1, p.T, tuple(instants), "m1")


def solve_alpha2(p: GameParameters) -> PiecewiseCoefficient:
    return solve_costate(p.A, p.w2, p.s2, 0.0, p.T, (), "alpha2")


def solve_m2(p: GameParameters) -> PiecewiseCoefficient:
    return solve_costate(p.A, p.w2, p.s2, 0.0, p.T, (), "m2")


def _offset(weight, first, second, bounds, jump_of, name):
    segments = []
    jumps = []
    end_value = 0.0
    for t0, t1 in reversed(list(zip(bounds, bounds[1:]))):
        f = first.segment_at(0.5 * (t0 + t1)).restrict(t0, t1)
        g = second.segment_at(0.5 * (t0 + t1)).restrict(t0, t1)
        seg = OffsetSegment(t0, t1, end_value, weight, f, g)
        segments.append(seg)
        if t0 > 0.0:
            right = float(seg.evaluate(t0))
            left = right + jump_of(t0)
            jumps.append(Jump(t0, left, right))
            end_value = left
    return PiecewiseCoefficient(tuple(reversed(segments)), tuple(reversed(jumps)), name)


def solve_offsets(p: GameParameters, alpha1: PiecewiseCoefficient, alpha2: PiecewiseCoefficient,
                  sched: ImpulseSchedule) -> tuple:
    """State-free parts of the linear value functions V_i = alpha_i x + beta_i.

    beta1' = B^2 alpha1^2 / (2 R1) and beta2' = B^2 alpha1 alpha2 / R1, both
    zero at T. Across an impulse of level v at tau:
    beta1(tau-) = beta1(tau+) + alpha1(tau+) Q v and
    beta2(tau-) = beta2(tau+) + alpha2(tau+) Q v + P2 v^2 / 2 + C.
    """
    breaks = set(alpha1.breakpoints)
    for t in sched.instants:
        if not 0.0 < t < p.T:
            raise ValueError(f"offsets need interior impulse instants, got {t}")
        if t not in breaks and p.q1 != 0.0:
            raise ValueError(f"alpha1 has no jump at impulse instant {t}")
    bounds = merged_breaks(0.0, p.T, alpha1.breakpoints, alpha2.breakpoints, sched.instants)
    levels = dict(zip(sched.instants, sched.levels))
    b2 = p.B**2

    def jump1(t):
        v = levels.get(t, 0.0)
        return alpha1(t, "right") * p.Q * v if t in levels else 0.0

    def jump2(t):
        if t not in levels:
            return 0.0
        v = levels[t]
        return alpha2(t, "right") * p.Q * v + 0.5 * p.P2 * v**2 + p.C

    beta1 = _offset(b2 / (2 * p.R1), alpha1, alpha1, bounds, jump1, "beta1")
    beta2 = _offset(b2 / p.R1, alpha1, alpha2, bounds, jump2, "beta2")
    return beta1, beta2
