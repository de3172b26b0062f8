"""Feedback equilibrium with endogenous impulse timing.

Under linear value functions V_i(t, x) = alpha_i(t) x + beta_i(t), the
intervention operator gives

    V2 - R V2 = -C + Q^2 alpha2(t)^2 / (2 P2),

which vanishes exactly where alpha2(t)^2 = gamma^2 = 2 P2 C / Q^2. The stopping
set therefore does not depend on x, and because alpha2 is monotone in t it can
reach +gamma and -gamma at most once each: at most two impulses, each of
level -Q alpha2 / P2, so of fixed magnitude sqrt(2 C / P2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .coefficients import solve_alpha1, solve_alpha2, solve_offsets
from .errors import BoundaryDegenerate, InconsistentClassification
from .model import (DEFAULT_STEPS, GameParameters, ImpulseSchedule, PayoffPair, Trajectory,
                    simulate_and_evaluate, validate_params)
from .segments import PiecewiseCoefficient, is_zero_rate

TIME_TOL = 1e-10


def gamma(p: GameParameters) -> float:
    return math.sqrt(2.0 * p.P2 * p.C / p.Q**2)


def _raw_times(p: GameParameters, g: float) -> tuple:
    """Closed-form crossing times of alpha2 = +gamma and -gamma, or None."""
    A, w2, s2, T = p.A, p.w2, p.s2, p.T
    if is_zero_rate(A):
        if w2 == 0.0:
            return None, None
        return T - (g - s2) / w2, T + (g + s2) / w2
    S = A * s2 + w2
    if S == 0.0:
        return None, None
    out = []
    for sign in (1.0, -1.0):
        arg = (w2 + sign * A * g) / S
        out.append(T - math.log(arg) / A if arg > 0.0 else None)
    return tuple(out)


def _interior_predicates(p: GameParameters, g: float) -> tuple:
    """Sign tests equivalent to 0 < tau_fb^1 < T and 0 < tau_fb^2 < T."""
    A, w2, s2, T = p.A, p.w2, p.s2, p.T
    if is_zero_rate(A):
        a0 = T * w2 + s2
        first = [(a0 - g) * w2, (g - s2) * w2]
        second = [(a0 + g) * w2, -(g + s2) * w2]
        return first, second
    S = A * s2 + w2
    if A < 0:
        K = w2 * (math.exp(A * T) - 1.0) + A * s2 * math.exp(A * T)
        first = [(w2 + A * g) * S, -(K - A * g) * S, (g - s2) * S]
        second = [(w2 - A * g) * S, -(K + A * g) * S, -(g + s2) * S]
    else:
        E = math.exp(-A * T)
        K = w2 * (1.0 - E) + A * s2
        first = [(w2 + A * g) * S, (K - A * g * E) * S, (g - s2) * S]
        second = [(w2 - A * g) * S, (K + A * g * E) * S, -(g + s2) * S]
    return first, second


def fne_candidate_times(p: GameParameters) -> tuple:
    """(tau1, tau2): instants where alpha2 = +gamma / -gamma, None unless interior."""
    validate_params(p)
    g = gamma(p)
    tol = TIME_TOL * max(1.0, p.T)
    flat = (p.w2 == 0.0) if is_zero_rate(p.A) else (p.A * p.s2 + p.w2 == 0.0)
    if flat and abs(abs(p.s2) - g) <= TIME_TOL * max(1.0, g):
        raise BoundaryDegenerate("alpha2 is constant and equal to the impulse threshold")
    raw = _raw_times(p, g)
    for name, tau in zip(("tau1", "tau2"), raw):
        if tau is not None and (abs(tau) < tol or abs(tau - p.T) < tol):
            raise BoundaryDegenerate(f"{name}={tau!r} is on the horizon boundary")
    preds = _interior_predicates(p, g)
    out = []
    for name, tau, pred in zip(("tau1", "tau2"), raw, preds):
        admitted = tau is not None and all(m > 0 for m in pred)
        if admitted != (tau is not None and 0.0 < tau < p.T):
            raise InconsistentClassification(
                f"{name}: sign tests say {admitted}, closed form gives {tau!r}")
        out.append(tau if admitted else None)
    return tuple(out)


def fne_impulse_levels(p: GameParameters, candidates: tuple) -> tuple:
    """Levels -Q alpha2 / P2 with alpha2 = +gamma at tau1 and -gamma at tau2."""
    g = gamma(p)
    tau1, tau2 = candidates
    v1 = -p.Q * g / p.P2 if tau1 is not None else None
    v2 = p.Q * g / p.P2 if tau2 is not None else None
    return v1, v2


def _condition_systems(p: GameParameters, g: float) -> tuple:
    """Inequality systems for two / tau1-only / tau2-only, as margins (> 0 holds)."""
    A, w2, s2, T = p.A, p.w2, p.s2, p.T
    if is_zero_rate(A):
        a0 = T * w2 + s2
        letter = "a"
        systems = {
            "two": [[w2, a0 - g, -g - s2], [-w2, -g - a0, s2 - g]],
            "tau1-only": [[(a0 - g) * w2, a0 + g, (g - s2) * w2, s2 + g]],
            "tau2-only": [[(a0 + g) * w2, g - a0, -(g + s2) * w2, g - s2]],
        }
    elif A < 0:
        letter = "b"
        K = w2 * (math.exp(A * T) - 1.0) + A * s2 * math.exp(A * T)
        Kp = w2 * (1.0 - math.exp(-A * T)) + A * s2
        Ag, AgE = A * g, A * g * math.exp(-A * T)
        systems = {
            "two": [[Ag - K, -g - s2], [Kp + AgE, s2 - g]],
            "tau1-only": [[Ag - K, s2 + g, g - s2, -Ag - K],
                          [s2 - g, K - Ag, -Ag - K]],
            "tau2-only": [[-Ag - K, -g - s2, K - Ag],
                          [s2 + g, g - s2, K + Ag, K - Ag]],
        }
    else:
        letter = "c"
        Kp = w2 * (1.0 - math.exp(-A * T)) + A * s2
        AgE = A * g * math.exp(-A * T)
        systems = {
            "two": [[Kp - AgE, -g - s2], [-AgE - Kp, s2 - g]],
            "tau1-only": [[s2 + g, g - s2, Kp - AgE, Kp + AgE],
                          [s2 - g, AgE - Kp, Kp + AgE]],
            "tau2-only": [[-g - s2, Kp + AgE, AgE - Kp],
                          [s2 + g, g - s2, -AgE - Kp, AgE - Kp]],
        }
    return letter, systems


@dataclass(frozen=True)
class FneRegime:
    k: int
    interior: str  # "tau1", "tau2", "both" or "neither"
    tau1_first: bool  # alpha2 decreasing, so +gamma is reached before -gamma
    label: str
    margins: tuple = ()

    def to_dict(self) -> dict:
        return {"k": self.k, "interior": self.interior, "tau1_first": self.tau1_first,
                "label": self.label, "margins": list(self.margins)}


_KIND_OF = {(True, True): "two", (True, False): "tau1-only",
            (False, True): "tau2-only", (False, False): "none"}
_INTERIOR_OF = {"two": "both", "tau1-only": "tau1", "tau2-only": "tau2", "none": "neither"}


def classify_fne_regime(p: GameParameters) -> FneRegime:
    validate_params(p)
    g = gamma(p)
    tau1, tau2 = fne_candidate_times(p)
    direct = _KIND_OF[(tau1 is not None, tau2 is not None)]
    letter, systems = _condition_systems(p, g)
    held = [(kind, i, margins) for kind, disjuncts in systems.items()
            for i, margins in enumerate(disjuncts, start=1) if all(m > 0 for m in margins)]
    kinds = {kind for kind, _, _ in held}
    by_inequalities = kinds.pop() if len(kinds) == 1 else ("none" if not kinds else "ambiguous")
    if by_inequalities != direct:
        raise InconsistentClassification(
            f"inequality systems give {by_inequalities!r}, crossing times give {direct!r}"
            f" (tau1={tau1!r}, tau2={tau2!r})")
    if is_zero_rate(p.A):
        tau1_first = p.w2 > 0
    else:
        tau1_first = p.w2 + p.A * p.s2 > 0
    if direct == "none":
        return FneRegime(0, "neither", tau1_first, "none")
    kind, i, margins = held[0]
    k = 2 if kind == "two" else 1
    if k == 2 and (tau1 < tau2) != tau1_first:
        raise InconsistentClassification("impulse ordering contradicts the slope of alpha2")
    return FneRegime(k, _INTERIOR_OF[kind], tau1_first, f"{kind}/({letter})/{i}",
                     tuple(float(m) for m in margins))


@dataclass(frozen=True)
class FneSolution:
    k: int
    schedule: ImpulseSchedule
    u: PiecewiseCoefficient
    alpha1: PiecewiseCoefficient
    beta1: PiecewiseCoefficient
    alpha2: PiecewiseCoefficient
    beta2: PiecewiseCoefficient
    payoffs: PayoffPair
    regime: FneRegime
    gamma: float
    trajectory: Trajectory = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "kind": "feedback",
            "k": self.k,
            "gamma": self.gamma,
            "schedule": self.schedule.to_list(),
            "control": [s.to_dict() for s in self.u.segments],
            "payoffs": self.payoffs.to_dict(),
            "coefficients": {name: getattr(self, name).to_dict()
                             for name in ("alpha1", "beta1", "alpha2", "beta2")},
            "regime": self.regime.to_dict(),
        }


def solve_endogenous_fne(p: GameParameters, n_steps: int = DEFAULT_STEPS) -> FneSolution:
    regime = classify_fne_regime(p)
    g = gamma(p)
    candidates = fne_candidate_times(p)
    levels = fne_impulse_levels(p, candidates)
    pairs = sorted((t, v) for t, v in zip(candidates, levels) if t is not None)
    sched = ImpulseSchedule.from_pairs([t for t, _ in pairs], [v for _, v in pairs])
    alpha1 = solve_alpha1(p, sched.instants)
    alpha2 = solve_alpha2(p)
    beta1, beta2 = solve_offsets(p, alpha1, alpha2, sched)
    u = alpha1.scaled(-p.B / p.R1, "u")
    traj, payoffs = simulate_and_evaluate(p, u, sched, n_steps)
    return FneSolution(sched.k, sched, u, alpha1, beta1, alpha2, beta2, payoffs, regime, g, traj)


def evaluate_value1(p: GameParameters, sol: FneSolution, t: float, x, side: str = "left"):
    return sol.alpha1(t, side) * x + sol.beta1(t, side)


def evaluate_value2(p: GameParameters, sol: FneSolution, t: float, x, side: str = "left"):
    return sol.alpha2(t, side) * x + sol.beta2(t, side)


def best_impulse_level(p: GameParameters, sol: FneSolution, t: float) -> float:
    return -p.Q * sol.alpha2(t) / p.P2


def apply_R_operator(p: GameParameters, sol: FneSolution, t: float, x, side: str = "left"):
    """max_v P2 v^2 / 2 + C + V2(t, x + Q v), in closed form."""
    a2 = sol.alpha2(t, side)
    return p.C - p.Q**2 * a2**2 / (2.0 * p.P2) + evaluate_value2(p, sol, t, x, side)
