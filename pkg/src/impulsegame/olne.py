"""Open-loop equilibrium with endogenous impulse timing.

Hamiltonian continuity of player 2 at an interior impulse pins the player-2
costate to a single value, and since that costate is strictly monotone the
equilibrium has at most one impulse. Whether it is interior depends on four
sign cases of (A, q1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .coefficients import solve_lambda1, solve_lambda2, solve_offsets
from .errors import BoundaryDegenerate, InconsistentClassification
from .model import (DEFAULT_STEPS, GameParameters, ImpulseSchedule, PayoffPair, Trajectory,
                    simulate_and_evaluate, validate_params)
from .segments import PiecewiseCoefficient, is_zero_rate

MARGIN_TOL = 1e-10
LEVEL_TOL = 1e-10


def delta(p: GameParameters) -> float:
    """(P2 / R1) (B / Q)^2, positive because P2 and R1 are both negative."""
    return (p.P2 / p.R1) * (p.B / p.Q) ** 2


@dataclass(frozen=True)
class OlneRegime:
    label: str  # "A0-no-impulse", "a".."d" or "none"
    margins: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return 1 if self.label in ("a", "b", "c", "d") else 0

    def to_dict(self) -> dict:
        return {"label": self.label, "k": self.k, "margins": dict(self.margins)}


def _case_letter(A: float, q1: float) -> str:
    if A > 0:
        return "a" if q1 > 0 else "b"
    return "c" if q1 > 0 else "d"


def _bounds(p: GameParameters) -> tuple:
    d = delta(p)
    hi, lo = p.q1 * d, p.q1 * d * math.exp(-p.A * p.T)
    # cases (a) and (d) bracket As2+w2 by q1*delta*e^{-AT} below; (b) and (c) above
    return (lo, hi) if p.A * p.q1 > 0 else (hi, lo)


def _olne_time(p: GameParameters) -> float | None:
    S = p.A * p.s2 + p.w2
    if S == 0.0 or p.q1 == 0.0:
        return None
    arg = delta(p) * p.q1 / S
    if arg <= 0.0:
        return None
    return p.T - math.log(arg) / p.A


def classify_olne_regime(p: GameParameters) -> OlneRegime:
    validate_params(p)
    if is_zero_rate(p.A):
        return OlneRegime("A0-no-impulse")
    S = p.A * p.s2 + p.w2
    lower, upper = _bounds(p)
    margins = {"lower": S - lower, "upper": upper - S}
    if p.q1 == 0.0:
        return OlneRegime("none", margins)
    scale = max(abs(lower), abs(upper))
    for name, m in margins.items():
        if abs(m) < MARGIN_TOL * scale:
            raise BoundaryDegenerate(f"open-loop impulse at the horizon edge ({name} margin {m:.3e})")
    tau = _olne_time(p)
    tol = MARGIN_TOL * max(1.0, p.T)
    if tau is not None and (abs(tau) < tol or abs(tau - p.T) < tol):
        raise BoundaryDegenerate(f"open-loop impulse instant {tau!r} is on the boundary")
    if margins["lower"] > 0 and margins["upper"] > 0:
        return OlneRegime(_case_letter(p.A, p.q1), margins)
    return OlneRegime("none", margins)


def lambda2_target(p: GameParameters) -> float:
    """Player-2 costate value forced by Hamiltonian continuity (A != 0)."""
    return (p.B**2 * p.q1 * p.P2 - p.w2 * p.Q**2 * p.R1) / (p.R1 * p.A * p.Q**2)


def olne_level(p: GameParameters) -> float:
    return p.Q * p.w2 / (p.P2 * p.A) - p.B**2 * p.q1 / (p.A * p.Q * p.R1)


def hamiltonian_continuity_residual(p: GameParameters, tau: float) -> float:
    lam2 = solve_lambda2(p)(tau)
    return -((p.w2 + p.A * lam2) * p.Q**2 / p.P2 - p.B**2 * p.q1 / p.R1) * lam2


@dataclass(frozen=True)
class OlneSolution:
    k: int
    schedule: ImpulseSchedule
    u: PiecewiseCoefficient
    lambda1: PiecewiseCoefficient
    lambda2: PiecewiseCoefficient
    lambda2_at_tau: float | None
    payoffs: PayoffPair
    regime: OlneRegime
    offsets: tuple = field(repr=False)
    trajectory: Trajectory = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "kind": "open-loop",
            "k": self.k,
            "schedule": self.schedule.to_list(),
            "control": [s.to_dict() for s in self.u.segments],
            "payoffs": self.payoffs.to_dict(),
            "coefficients": {"lambda1": self.lambda1.to_dict(),
                             "lambda2": self.lambda2.to_dict()},
            "lambda2_at_tau": self.lambda2_at_tau,
            "regime": self.regime.to_dict(),
        }


def solve_endogenous_olne(p: GameParameters, n_steps: int = DEFAULT_STEPS) -> OlneSolution:
    regime = classify_olne_regime(p)
    lam2 = solve_lambda2(p)
    target = None
    if regime.k == 1:
        tau = _olne_time(p)
        if tau is None or not 0.0 < tau < p.T:
            raise InconsistentClassification(
                f"regime {regime.label} but impulse instant {tau!r} is not interior")
        level = olne_level(p)
        target = lambda2_target(p)
        implied = -p.Q * lam2(tau) / p.P2
        if abs(level - implied) > LEVEL_TOL * max(1.0, abs(level)):
            raise InconsistentClassification(
                f"level formulas disagree: {level!r} vs {implied!r} at tau={tau!r}")
        sched = ImpulseSchedule.from_pairs([tau], [level])
    else:
        sched = ImpulseSchedule()
    lam1 = solve_lambda1(p, sched.instants)
    u = lam1.scaled(-p.B / p.R1, "u")
    offsets = solve_offsets(p, lam1, lam2, sched)
    traj, payoffs = simulate_and_evaluate(p, u, sched, n_steps)
    return OlneSolution(sched.k, sched, u, lam1, lam2, target, payoffs, regime, offsets, traj)
