"""Game data, hybrid state simulation and payoff evaluation.

Player 1 steers x' = A x + B u continuously and maximizes

    J1 = int_0^T (w1 x + R1 u^2 / 2) dt + sum_i q1 x(tau_i-) + s1 x(T)

while player 2 applies jumps x(tau_i+) = x(tau_i-) + Q v_i and maximizes

    J2 = int_0^T w2 x dt + sum_i (C + P2 v_i^2 / 2) + s2 x(T).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, fields
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import expm

from .errors import (GridTooCoarse, NonFiniteState, ParameterError, ScheduleError,
                     SignViolation, ZeroCoefficient)
from .segments import Jump, PiecewiseCoefficient

DEFAULT_STEPS = 1000

Control = Union[PiecewiseCoefficient, Callable[[np.ndarray], np.ndarray], float]


@dataclass(frozen=True)
class GameParameters:
    A: float
    B: float
    Q: float
    w1: float
    R1: float
    q1: float
    s1: float
    w2: float
    P2: float
    C: float
    s2: float
    T: float
    x0: float

    def replace(self, **changes) -> "GameParameters":
        return GameParameters(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)


FIELD_NAMES = tuple(f.name for f in fields(GameParameters))

_NEGATIVE = ("R1", "P2", "C")


def validate_params(p: GameParameters) -> GameParameters:
    for name in FIELD_NAMES:
        value = getattr(p, name)
        if not math.isfinite(value):
            raise ParameterError(f"{name}={value!r} is not finite")
    for name in _NEGATIVE:
        if not getattr(p, name) < 0:
            raise SignViolation(name, getattr(p, name), f"{name} < 0")
    if not p.T > 0:
        raise SignViolation("T", p.T, "T > 0")
    for name in ("B", "Q"):
        if getattr(p, name) == 0:
            raise ZeroCoefficient(name)
    return p


def params_from_mapping(data: Mapping) -> GameParameters:
    """Build parameters from a mapping holding exactly the thirteen fields."""
    if not isinstance(data, Mapping):
        raise ParameterError("parameters must be a JSON object")
    unknown = sorted(set(data) - set(FIELD_NAMES))
    if unknown:
        raise ParameterError(f"unknown parameter field(s): {', '.join(unknown)}")
    missing = [n for n in FIELD_NAMES if n not in data]
    if missing:
        raise ParameterError(f"missing parameter field(s): {', '.join(missing)}")
    values = {}
    for name in FIELD_NAMES:
        v = data[name]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParameterError(f"{name} must be a number, got {v!r}")
        values[name] = float(v)
    return GameParameters(**values)


@dataclass(frozen=True)
class ImpulseAction:
    instant: float
    level: float


@dataclass(frozen=True)
class ImpulseSchedule:
    actions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        for a, b in zip(self.actions, self.actions[1:]):
            if not a.instant < b.instant:
                raise ScheduleError(
                    f"impulse instants must be strictly increasing ({a.instant}, {b.instant})")

    @classmethod
    def from_pairs(cls, instants: Iterable[float], levels: Iterable[float]) -> "ImpulseSchedule":
        instants, levels = list(instants), list(levels)
        if len(instants) != len(levels):
            raise ScheduleError("instants and levels differ in length")
        return cls(tuple(ImpulseAction(float(t), float(v)) for t, v in zip(instants, levels)))

    @property
    def k(self) -> int:
        return len(self.actions)

    @property
    def instants(self) -> tuple:
        return tuple(a.instant for a in self.actions)

    @property
    def levels(self) -> tuple:
        return tuple(a.level for a in self.actions)

    def check_horizon(self, T: float) -> None:
        for a in self.actions:
            if not 0.0 <= a.instant <= T:
                raise ScheduleError(f"impulse instant {a.instant} outside [0, {T}]")

    def touches_boundary(self, T: float) -> bool:
        """True when an impulse sits at t=0 or t=T (allowed, but never an equilibrium)."""
        return any(a.instant in (0.0, T) for a in self.actions)

    def to_list(self) -> list:
        return [{"instant": a.instant, "level": a.level} for a in self.actions]


def check_instants(T: float, instants: Sequence[float]) -> tuple:
    """Exogenous instants must be strictly increasing and strictly inside (0, T)."""
    instants = tuple(float(t) for t in instants)
    for t in instants:
        if not 0.0 < t < T:
            raise ScheduleError(f"instant {t} is not interior to (0, {T})")
    ImpulseSchedule.from_pairs(instants, [0.0] * len(instants))
    return instants


@dataclass(frozen=True)
class TrajectoryPiece:
    t: np.ndarray
    x: np.ndarray

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t1(self) -> float:
        return float(self.t[-1])


@dataclass(frozen=True)
class Trajectory:
    """State samples on [0, T], split wherever the state or the control jumps."""

    pieces: tuple
    jumps: tuple
    x0: float
    final: float
    exact: bool

    @property
    def grid(self) -> np.ndarray:
        return np.concatenate([pc.t for pc in self.pieces])

    @property
    def states(self) -> np.ndarray:
        return np.concatenate([pc.x for pc in self.pieces])

    def state(self, t: float, side: str = "left") -> float:
        for j in self.jumps:
            if j.instant == t:
                return j.left if side == "left" else j.right
        for pc in self.pieces:
            if pc.t0 <= t <= pc.t1:
                return float(np.interp(t, pc.t, pc.x))
        raise ValueError(f"t={t} outside the trajectory")

    def rows(self) -> list:
        rows = []
        first, last = self.pieces[0], self.pieces[-1]
        jump_times = {j.instant for j in self.jumps}
        if first.t0 in jump_times:
            rows.append((first.t0, self.x0, "left"))
        n = len(self.pieces)
        for j, pc in enumerate(self.pieces):
            m = len(pc.t)
            for i in range(m):
                side = "interior"
                if i == 0 and (j > 0 or pc.t0 in jump_times):
                    side = "right"
                elif i == m - 1 and (j < n - 1 or pc.t1 in jump_times):
                    side = "left"
                rows.append((float(pc.t[i]), float(pc.x[i]), side))
        if last.t1 in jump_times:
            rows.append((last.t1, self.final, "right"))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "x", "side"])
        for t, x, side in self.rows():
            writer.writerow([repr(t), repr(x), side])
        return buf.getvalue()


@dataclass(frozen=True)
class PayoffPair:
    J1: float
    J2: float

    def to_dict(self) -> dict:
        return {"J1": self.J1, "J2": self.J2}


def control_on_piece(u: Control, t: np.ndarray, t0: float, t1: float) -> np.ndarray:
    """Control values on samples of [t0, t1], taking one-sided limits at the ends."""
    t = np.asarray(t, dtype=float)
    if hasattr(u, "on_piece"):
        return np.asarray(u.on_piece(t, t0, t1), dtype=float)
    if callable(u):
        eps = 1e-12 * (t1 - t0)
        return np.asarray(u(np.clip(t, t0 + eps, t1 - eps)), dtype=float) * np.ones_like(t)
    return np.full_like(t, float(u))


def _piece_bounds(T: float, sched: ImpulseSchedule, u: Control) -> list:
    points = {0.0, T}
    points.update(t for t in sched.instants if 0.0 < t < T)
    points.update(float(t) for t in getattr(u, "breakpoints", ()) if 0.0 < t < T)
    return sorted(points)


def _exact_piece(p: GameParameters, u: PiecewiseCoefficient, t0, t1, x_start, n):
    seg = u.segment_at(0.5 * (t0 + t1))
    ts = np.linspace(t0, t1, n + 1)
    # augmented state (x, u, 1) with u' = -rate*u - drift
    M = np.array([[p.A, p.B, 0.0],
                  [0.0, -seg.rate, -seg.drift],
                  [0.0, 0.0, 0.0]])
    z0 = np.array([x_start, float(seg.evaluate(t0)), 1.0])
    # uniform grid: propagators are powers of one step, built by doubling
    props = np.eye(3)[None, :, :]
    block = expm(M * ((t1 - t0) / n))
    while len(props) < n + 1:
        props = np.concatenate([props, props @ block])
        block = block @ block
    return ts, props[: n + 1, 0, :] @ z0


def _rk4_piece(p: GameParameters, u: Control, t0, t1, x_start, n):
    ts = np.linspace(t0, t1, n + 1)
    fine = np.linspace(t0, t1, 2 * n + 1)
    uf = control_on_piece(u, fine, t0, t1)
    h = (t1 - t0) / n
    A, B = p.A, p.B
    xs = np.empty(n + 1)
    x = x_start
    xs[0] = x
    # overflow is reported by the caller as NonFiniteState
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            ua, um, ub = uf[2 * k], uf[2 * k + 1], uf[2 * k + 2]
            k1 = A * x + B * ua
            k2 = A * (x + 0.5 * h * k1) + B * um
            k3 = A * (x + 0.5 * h * k2) + B * um
            k4 = A * (x + h * k3) + B * ub
            x = x + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            xs[k + 1] = x
    return ts, xs


def simulate_trajectory(p: GameParameters, u: Control, sched: ImpulseSchedule | None = None,
                        n_steps: int = DEFAULT_STEPS) -> Trajectory:
    """Integrate the state between impulses and apply the jumps.

    Exponential-affine controls (a PiecewiseCoefficient of exponential
    segments) are propagated exactly; anything else uses RK4 with ``n_steps``
    steps per impulse-free piece.
    """
    sched = sched or ImpulseSchedule()
    sched.check_horizon(p.T)
    if n_steps < 1:
        raise GridTooCoarse("n_steps must be positive")
    exact = isinstance(u, PiecewiseCoefficient) and u.is_exponential
    levels = dict(zip(sched.instants, sched.levels))
    bounds = _piece_bounds(p.T, sched, u)

    jumps = []
    x = p.x0
    if 0.0 in levels:
        jumps.append(Jump(0.0, x, x + p.Q * levels[0.0]))
        x = jumps[-1].right
    pieces = []
    for t0, t1 in zip(bounds, bounds[1:]):
        step = _exact_piece if exact else _rk4_piece
        ts, xs = step(p, u, t0, t1, x, n_steps)
        if not np.all(np.isfinite(xs)):
            raise NonFiniteState(f"state overflowed on [{t0}, {t1}]")
        pieces.append(TrajectoryPiece(ts, xs))
        x = float(xs[-1])
        if t1 in levels:
            jumps.append(Jump(t1, x, x + p.Q * levels[t1]))
            x = jumps[-1].right
    if not math.isfinite(x):
        raise NonFiniteState("final state is not finite")
    return Trajectory(tuple(pieces), tuple(jumps), p.x0, x, exact)


def evaluate_payoffs(p: GameParameters, traj: Trajectory, u: Control,
                     sched: ImpulseSchedule | None = None) -> PayoffPair:
    """Both objectives, with composite Simpson on each impulse-free piece."""
    sched = sched or ImpulseSchedule()
    J1 = J2 = 0.0
    for pc in traj.pieces:
        if len(pc.t) < 3:
            raise GridTooCoarse(f"piece [{pc.t0}, {pc.t1}] has {len(pc.t)} samples, need 3")
        uv = control_on_piece(u, pc.t, pc.t0, pc.t1)
        J1 += simpson(p.w1 * pc.x + 0.5 * p.R1 * uv**2, x=pc.t)
        J2 += simpson(p.w2 * pc.x, x=pc.t)
    for a in sched.actions:
        J1 += p.q1 * traj.state(a.instant, "left")
        J2 += p.C + 0.5 * p.P2 * a.level**2
    J1 += p.s1 * traj.final
    J2 += p.s2 * traj.final
    return PayoffPair(float(J1), float(J2))


def simulate_and_evaluate(p: GameParameters, u: Control, sched: ImpulseSchedule | None = None,
                          n_steps: int = DEFAULT_STEPS) -> tuple:
    traj = simulate_trajectory(p, u, sched, n_steps)
    return traj, evaluate_payoffs(p, traj, u, sched)
