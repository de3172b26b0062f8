"""Piecewise exponential-affine time functions.

Every costate and value-function slope in the game solves the scalar ODE

    y'(t) = -r * y(t) - d

on each impulse-free interval, so on that interval it is determined by its
value at the right end of the interval. With ``lag = t_end - t``::

    y(t) = y_end * exp(r * lag) + d * phi1(r, lag),   phi1(r, s) = (exp(r s) - 1) / r

This form is used instead of ``-d/r + (y_end + d/r) exp(r lag)`` because it is
well conditioned for small ``r`` and reduces to the affine limit at ``r = 0``.
The offsets that accompany linear value functions integrate products of two
such segments; those antiderivatives are closed form as well.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ZERO_RATE = 1e-12
_SERIES_CUTOFF = 0.1
_SERIES_TERMS = 24


def is_zero_rate(rate: float) -> bool:
    return abs(rate) < ZERO_RATE


def _phi(z):
    """expm1(z) / z, equal to 1 at z = 0."""
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    nz = z != 0.0
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


def _series(z, start: int, coeff):
    # sum_{n >= start} coeff(n) z^(n-start) / (n+1)!
    total = np.zeros_like(z)
    power = np.ones_like(z)
    for n in range(start, start + _SERIES_TERMS):
        total = total + coeff(n) * power / math.factorial(n + 1)
        power = power * z
    return total


def _psi1(z):
    """(phi(2z) - phi(z)) / z, the kernel of the integral of exp * phi1."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < _SERIES_CUTOFF
    out = np.empty_like(z)
    zs = z[small]
    out[small] = _series(zs, 1, lambda n: 2.0**n - 1.0)
    zl = z[~small]
    out[~small] = (_phi(2 * zl) - _phi(zl)) / zl
    return out


def _psi2(z):
    """(phi(2z) - 2 phi(z) + 1) / z**2, the kernel of the integral of phi1**2."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < _SERIES_CUTOFF
    out = np.empty_like(z)
    zs = z[small]
    out[small] = _series(zs, 2, lambda n: 2.0**n - 2.0)
    zl = z[~small]
    out[~small] = (_phi(2 * zl) - 2 * _phi(zl) + 1.0) / zl**2
    return out


def phi1(rate: float, lag):
    """Integral of exp(rate * s) for s in [0, lag]."""
    lag = np.asarray(lag, dtype=float)
    if is_zero_rate(rate):
        return lag.copy()
    return lag * _phi(rate * lag)


def product_integrals(rate: float, length):
    """Integrals over s in [0, length] of E^2, E*F and F^2.

    E(s) = exp(rate s) and F(s) = phi1(rate, s).
    """
    length = np.asarray(length, dtype=float)
    if is_zero_rate(rate):
        return length.copy(), length**2 / 2.0, length**3 / 3.0
    z = rate * length
    return length * _phi(2 * z), length**2 * _psi1(z), length**3 * _psi2(z)


@dataclass(frozen=True)
class ExponentialSegment:
    """Solution of y' = -rate*y - drift on [t_start, t_end], pinned at t_end."""

    t_start: float
    t_end: float
    terminal: float
    drift: float
    rate: float

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"empty segment [{self.t_start}, {self.t_end}]")

    def evaluate(self, t):
        lag = self.t_end - np.asarray(t, dtype=float)
        if is_zero_rate(self.rate):
            return self.terminal + self.drift * lag
        return self.terminal * np.exp(self.rate * lag) + self.drift * phi1(self.rate, lag)

    def derivative(self, t):
        return -self.rate * self.evaluate(t) - self.drift

    def restrict(self, t_start: float, t_end: float) -> "ExponentialSegment":
        return ExponentialSegment(t_start, t_end, float(self.evaluate(t_end)), self.drift, self.rate)

    def scaled(self, factor: float) -> "ExponentialSegment":
        return ExponentialSegment(self.t_start, self.t_end, factor * self.terminal,
                                  factor * self.drift, self.rate)

    # base + amp * exp(rate * (anchor - t)), or base + slope * (anchor - t) at rate 0
    @property
    def anchor(self) -> float:
        return self.t_end

    @property
    def base(self) -> float:
        if is_zero_rate(self.rate):
            return self.terminal
        return -self.drift / self.rate

    @property
    def amp(self) -> float:
        if is_zero_rate(self.rate):
            return 0.0
        return self.terminal + self.drift / self.rate

    @property
    def slope(self) -> float:
        return self.drift if is_zero_rate(self.rate) else 0.0

    def to_dict(self) -> dict:
        return {
            "t_start": self.t_start, "t_end": self.t_end,
            "base": self.base, "amp": self.amp, "rate": self.rate,
            "anchor": self.anchor, "slope": self.slope,
        }


@dataclass(frozen=True)
class OffsetSegment:
    """y(t) = terminal - weight * integral_t^t_end first(s) * second(s) ds.

    ``first`` and ``second`` must share this segment's interval and rate.
    """

    t_start: float
    t_end: float
    terminal: float
    weight: float
    first: ExponentialSegment
    second: ExponentialSegment

    def __post_init__(self):
        for s in (self.first, self.second):
            if (s.t_start, s.t_end) != (self.t_start, self.t_end):
                raise ValueError("factor segments must share the offset interval")
        if self.first.rate != self.second.rate:
            raise ValueError("factor segments must share a rate")

    def integral_to_end(self, t):
        lag = self.t_end - np.asarray(t, dtype=float)
        i0, i1, i2 = product_integrals(self.first.rate, lag)
        e1, d1 = self.first.terminal, self.first.drift
        e2, d2 = self.second.terminal, self.second.drift
        return e1 * e2 * i0 + (e1 * d2 + e2 * d1) * i1 + d1 * d2 * i2

    def evaluate(self, t):
        return self.terminal - self.weight * self.integral_to_end(t)

    def derivative(self, t):
        return self.weight * self.first.evaluate(t) * self.second.evaluate(t)

    def to_dict(self) -> dict:
        return {"t_start": self.t_start, "t_end": self.t_end, "terminal": self.terminal,
                "weight": self.weight, "first": self.first.to_dict(),
                "second": self.second.to_dict()}


@dataclass(frozen=True)
class Jump:
    instant: float
    left: float
    right: float

    @property
    def size(self) -> float:
        return self.left - self.right


@dataclass(frozen=True)
class PiecewiseCoefficient:
    """Time function on [0, T] tiled by segments, with jumps at interior breaks.

    Evaluation at a break returns the left limit unless ``side="right"``.
    """

    segments: tuple
    jumps: tuple = ()
    name: str = ""
    _edges: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.segments:
            raise ValueError("at least one segment required")
        for a, b in zip(self.segments, self.segments[1:]):
            if a.t_end != b.t_start:
                raise ValueError(f"segments leave a gap at {a.t_end} / {b.t_start}")
        edges = np.array([s.t_start for s in self.segments] + [self.segments[-1].t_end])
        object.__setattr__(self, "_edges", edges)

    @property
    def t_start(self) -> float:
        return self.segments[0].t_start

    @property
    def t_end(self) -> float:
        return self.segments[-1].t_end

    @property
    def breakpoints(self) -> tuple:
        return tuple(float(e) for e in self._edges[1:-1])

    @property
    def is_exponential(self) -> bool:
        return all(isinstance(s, ExponentialSegment) for s in self.segments)

    def segment_index(self, t, side: str = "left"):
        if side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        # left: edges[i-1] < t <= edges[i]; right: edges[i-1] <= t < edges[i]
        idx = np.searchsorted(self._edges, t, side=side) - 1
        return np.clip(idx, 0, len(self.segments) - 1)

    def segment_at(self, t: float, side: str = "left"):
        return self.segments[int(self.segment_index(t, side))]

    def __call__(self, t, side: str = "left"):
        t_arr = np.asarray(t, dtype=float)
        if t_arr.ndim == 0:
            return float(self.segment_at(float(t_arr), side).evaluate(float(t_arr)))
        idx = self.segment_index(t_arr, side)
        out = np.empty_like(t_arr)
        for j in np.unique(idx):
            mask = idx == j
            out[mask] = self.segments[j].evaluate(t_arr[mask])
        return out

    def derivative(self, t, side: str = "left"):
        return float(self.segment_at(t, side).derivative(t))

    def on_piece(self, t, t0: float, t1: float):
        """Evaluate on the segment covering the open interval (t0, t1)."""
        seg = self.segment_at(0.5 * (t0 + t1))
        return np.asarray(seg.evaluate(t), dtype=float)

    def scaled(self, factor: float, name: str = "") -> "PiecewiseCoefficient":
        if not self.is_exponential:
            raise TypeError("only exponential segments can be rescaled")
        return PiecewiseCoefficient(
            tuple(s.scaled(factor) for s in self.segments),
            tuple(Jump(j.instant, factor * j.left, factor * j.right) for j in self.jumps),
            name or self.name,
        )

    def refined(self, cuts: Iterable[float]) -> "PiecewiseCoefficient":
        """Split exponential segments at extra interior times without changing values."""
        cuts = sorted(c for c in set(cuts) if self.t_start < c < self.t_end)
        pieces = []
        for seg in self.segments:
            inner = [c for c in cuts if seg.t_start < c < seg.t_end]
            bounds = [seg.t_start, *inner, seg.t_end]
            pieces.extend(seg.restrict(a, b) for a, b in zip(bounds, bounds[1:]))
        return PiecewiseCoefficient(tuple(pieces), self.jumps, self.name)

    def sample_rows(self, n_per_segment: int = 200) -> list:
        rows = []
        last = len(self.segments) - 1
        for j, seg in enumerate(self.segments):
            ts = np.linspace(seg.t_start, seg.t_end, n_per_segment + 1)
            vals = seg.evaluate(ts)
            for i, (t, v) in enumerate(zip(ts, vals)):
                side = "interior"
                if i == 0 and j > 0:
                    side = "right"
                elif i == n_per_segment and j < last:
                    side = "left"
                rows.append((float(t), float(v), side))
        return rows

    def to_csv(self, n_per_segment: int = 200) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "value", "side"])
        for t, v, side in self.sample_rows(n_per_segment):
            writer.writerow([repr(t), repr(v), side])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "segments": [s.to_dict() for s in self.segments],
            "jumps": [{"instant": j.instant, "left": j.left, "right": j.right}
                      for j in self.jumps],
        }


def merged_breaks(t0: float, t1: float, *groups: Sequence[float]) -> list:
    points = {t0, t1}
    for g in groups:
        points.update(float(x) for x in g if t0 < x < t1)
    return sorted(points)
