"""Equilibria when the impulse instants are fixed in advance.

With given instants player 2 only picks levels. In both information
structures the levels come from the player-2 slope at the instant and player
1's control from the player-1 slope, and the two equilibria coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coefficients import (solve_lambda1, solve_lambda2, solve_m1, solve_m2,
                           solve_offsets)
from .model import (DEFAULT_STEPS, GameParameters, ImpulseSchedule, PayoffPair, Trajectory,
                    check_instants, simulate_and_evaluate, validate_params)
from .segments import PiecewiseCoefficient


@dataclass(frozen=True)
class ExogenousSolution:
    kind: str  # "open-loop" or "feedback"
    schedule: ImpulseSchedule
    u: PiecewiseCoefficient
    coefficients: dict
    payoffs: PayoffPair
    trajectory: Trajectory = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "k": self.schedule.k,
            "schedule": self.schedule.to_list(),
            "control": [s.to_dict() for s in self.u.segments],
            "payoffs": self.payoffs.to_dict(),
            "coefficients": {k: v.to_dict() for k, v in self.coefficients.items()},
        }


def _levels(p: GameParameters, slope2: PiecewiseCoefficient, instants) -> list:
    # slope2 is continuous, so the side at the instant does not matter
    return [-p.Q * slope2(t, "right") / p.P2 for t in instants]


def solve_exogenous_olne(p: GameParameters, instants: Sequence[float] = (),
                         n_steps: int = DEFAULT_STEPS) -> ExogenousSolution:
    validate_params(p)
    instants = check_instants(p.T, instants)
    lam1 = solve_lambda1(p, instants)
    lam2 = solve_lambda2(p)
    sched = ImpulseSchedule.from_pairs(instants, _levels(p, lam2, instants))
    u = lam1.scaled(-p.B / p.R1, "u")
    traj, payoffs = simulate_and_evaluate(p, u, sched, n_steps)
    return ExogenousSolution("open-loop", sched, u, {"lambda1": lam1, "lambda2": lam2},
                             payoffs, traj)


def solve_exogenous_fne(p: GameParameters, instants: Sequence[float] = (),
                        n_steps: int = DEFAULT_STEPS) -> ExogenousSolution:
    validate_params(p)
    instants = check_instants(p.T, instants)
    m1 = solve_m1(p, instants)
    m2 = solve_m2(p)
    sched = ImpulseSchedule.from_pairs(instants, _levels(p, m2, instants))
    n1, n2 = solve_offsets(p, m1, m2, sched)
    u = m1.scaled(-p.B / p.R1, "u")
    traj, payoffs = simulate_and_evaluate(p, u, sched, n_steps)
    return ExogenousSolution("feedback", sched, u,
                             {"m1": m1, "n1": n1, "m2": m2, "n2": n2}, payoffs, traj)


@dataclass(frozen=True)
class CoincidenceReport:
    control_deviation: float
    level_deviation: float

    @property
    def deviation(self) -> float:
        return max(self.control_deviation, self.level_deviation)


def check_coincidence(p: GameParameters, instants: Sequence[float] = (),
                      n_grid: int = 2001) -> CoincidenceReport:
    """Sup-norm gap between the open-loop and feedback controls and levels."""
    ol = solve_exogenous_olne(p, instants)
    fb = solve_exogenous_fne(p, instants)
    grid = np.union1d(np.linspace(0.0, p.T, n_grid), np.asarray(ol.schedule.instants))
    dev_u = 0.0
    for side in ("left", "right"):
        dev_u = max(dev_u, float(np.max(np.abs(ol.u(grid, side) - fb.u(grid, side)))))
    dev_v = max((abs(a - b) for a, b in zip(ol.schedule.levels, fb.schedule.levels)),
                default=0.0)
    return CoincidenceReport(dev_u, dev_v)
