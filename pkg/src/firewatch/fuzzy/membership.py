"""Piecewise-linear membership functions (triangles and trapezoids)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

_KINDS = {"triangle": 3, "trapezoid": 4}


@dataclass(frozen=True)
class MembershipFunction:
    """A triangular or trapezoidal membership function.

    Breakpoints are given in non-decreasing order: ``(a, b, c)`` for a
    triangle with apex ``b``, ``(a, b, c, d)`` for a trapezoid with
    plateau ``[b, c]``.  Coincident breakpoints give vertical edges,
    which is how open-ended sets at a universe boundary are written
    (e.g. ``(0, 0, 450, 650)`` is fully on from 0 to 450).
    """

    kind: str
    points: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown membership kind {self.kind!r}")
        if len(self.points) != _KINDS[self.kind]:
            raise ConfigError(
                f"{self.kind} needs {_KINDS[self.kind]} breakpoints, got {len(self.points)}"
            )
        pts = tuple(float(p) for p in self.points)
        if any(not math.isfinite(p) for p in pts):
            raise ConfigError(f"non-finite breakpoint in {pts}")
        if any(q < p for p, q in zip(pts, pts[1:])):
            raise ConfigError(f"breakpoints must be non-decreasing, got {pts}")
        object.__setattr__(self, "points", pts)

    @property
    def _abcd(self) -> tuple[float, float, float, float]:
        """Breakpoints normalised to trapezoid form (a triangle is a
        zero-width plateau)."""
        if self.kind == "triangle":
            a, b, c = self.points
            return a, b, b, c
        return self.points  # type: ignore[return-value]

    @property
    def support(self) -> tuple[float, float]:
        return self.points[0], self.points[-1]

    @property
    def plateau(self) -> tuple[float, float]:
        a, b, c, d = self._abcd
        return b, c

    def __call__(self, x: float) -> float:
        return membership(self, x)


def membership(mf: MembershipFunction, x: float) -> float:
    """Evaluate ``mf`` at crisp ``x``.

    Returns a degree in [0, 1]; exactly 0 outside the support and
    exactly 1 on the plateau.
    """
    a, b, c, d = mf._abcd
    if x < a or x > d:
        return 0.0
    if b <= x <= c:
        return 1.0
    if x < b:
        # a < b here, otherwise the plateau branch would have caught x
        return (x - a) / (b - a)
    return (d - x) / (d - c)


def sample(mf: MembershipFunction, xs: np.ndarray) -> np.ndarray:
    """Vectorised :func:`membership` over a sample grid."""
    a, b, c, d = mf._abcd
    out = np.zeros_like(xs, dtype=float)
    if b > a:
        rising = (xs >= a) & (xs < b)
        out[rising] = (xs[rising] - a) / (b - a)
    out[(xs >= b) & (xs <= c)] = 1.0
    if d > c:
        falling = (xs > c) & (xs <= d)
        out[falling] = (d - xs[falling]) / (d - c)
    return out
