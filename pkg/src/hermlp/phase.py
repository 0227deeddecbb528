"""Phase geometry of the half-period projection-kernel integral.

The oscillatory representation of the spectral projection integrates

    psi(t; x, y) = t + ((|x|^2 + |y|^2) cos 2t - 2 x.y) / (2 sin 2t)

over t in (0, pi/2).  Writing a2 = |x|^2 + |y|^2 and b = x.y, interior
stationary points of psi solve the quadratic

    cos(2t)^2 - 2 b cos(2t) + (a2 - 1) = 0,

so cos 2t = b +- sqrt(disc) with disc = b^2 - a2 + 1.  This module
evaluates psi and its t-derivatives on arrays of t, locates the
stationary points with their curvatures, and assembles the mixed
second-derivative matrix in (x, y) of the reduced two-point phase at a
stationary point, whose spectrum is {0} union {-1/sin 2t} with the
latter repeated n-1 times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# cos values this close to +-1 are treated as a boundary collision rather
# than rejected, absorbing roundoff in b + sqrt(disc)
_CLAMP_TOL = 1e-12


def _pair(x, y):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d points of equal dimension")
    a2 = float(np.dot(x, x) + np.dot(y, y))
    b = float(np.dot(x, y))
    return x, y, a2, b


def phase_value(t, x, y):
    """psi(t; x, y); vectorized over t.  Infinite where sin 2t = 0."""
    _, _, a2, b = _pair(x, y)
    t = np.asarray(t, dtype=float)
    s = np.sin(2.0 * t)
    c = np.cos(2.0 * t)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = t + (a2 * c - 2.0 * b) / (2.0 * s)
    return val if val.ndim else float(val)


def phase_derivative(t, x, y):
    """d psi / dt; vectorized over t."""
    _, _, a2, b = _pair(x, y)
    t = np.asarray(t, dtype=float)
    s = np.sin(2.0 * t)
    c = np.cos(2.0 * t)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -(a2 - 1.0 - 2.0 * b * c + c * c) / (s * s)
    return val if val.ndim else float(val)


def phase_second_derivative(t, x, y):
    """d^2 psi / dt^2; vectorized over t."""
    _, _, a2, b = _pair(x, y)
    t = np.asarray(t, dtype=float)
    s = np.sin(2.0 * t)
    c = np.cos(2.0 * t)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 4.0 * (a2 * c - b * (1.0 + c * c)) / (s * s * s)
    return val if val.ndim else float(val)


@dataclass(frozen=True)
class CriticalPoint:
    t: float
    cos2t: float
    sin2t: float
    curvature: float  # psi'' there: +4 sqrt(disc)/sin 2t on the plus root
    kind: str  # "plus" or "minus" by the sign in front of sqrt(disc)
    at_boundary: bool  # collided with t = 0 or t = pi/2
    degenerate: bool  # double root, curvature 0


def _make_point(c_raw: float, kind: str, disc: float) -> CriticalPoint | None:
    if c_raw > 1.0 + _CLAMP_TOL or c_raw < -1.0 - _CLAMP_TOL:
        return None
    c = min(1.0, max(-1.0, c_raw))
    t = 0.5 * math.acos(c)
    s = math.sin(2.0 * t)
    boundary = s == 0.0
    degenerate = disc == 0.0
    if boundary:
        curv = math.inf if not degenerate else math.nan
    else:
        curv = 4.0 * math.sqrt(disc) / s
        if kind == "minus":
            curv = -curv
    return CriticalPoint(
        t=t, cos2t=c, sin2t=s, curvature=curv, kind=kind,
        at_boundary=boundary, degenerate=degenerate,
    )


@dataclass(frozen=True)
class CriticalPoints:
    a_sq: float
    b: float
    disc: float
    plus: CriticalPoint | None  # cos 2t = b + sqrt(disc)
    minus: CriticalPoint | None  # cos 2t = b - sqrt(disc), kept when b >= sqrt(disc)

    def interior(self) -> list[CriticalPoint]:
        return [p for p in (self.plus, self.minus)
                if p is not None and not p.at_boundary]


def critical_points(x, y) -> CriticalPoints:
    """Stationary points of the phase under the first-quadrant convention.

    The plus root is reported whenever disc >= 0 puts it in range; the
    minus root is reported only when it lies at or before the quarter
    period, i.e. b >= sqrt(disc).  Roots landing on t = 0 or t = pi/2
    (which happens exactly for y = x resp. y = -x) are flagged
    at_boundary with infinite curvature.
    """
    _, _, a2, b = _pair(x, y)
    disc = b * b - a2 + 1.0
    if disc < 0.0:
        return CriticalPoints(a_sq=a2, b=b, disc=disc, plus=None, minus=None)
    rt = math.sqrt(disc)
    plus = _make_point(b + rt, "plus", disc)
    minus = _make_point(b - rt, "minus", disc) if b >= rt else None
    return CriticalPoints(a_sq=a2, b=b, disc=disc, plus=plus, minus=minus)


def stationary_points_in(x, y, t_max: float) -> list[CriticalPoint]:
    """Every interior stationary point with 0 < t < t_max.

    Unlike :func:`critical_points` this drops the quarter-period
    convention on the minus root, since integration windows extending
    past pi/4 see that root wherever it lands.
    """
    _, _, a2, b = _pair(x, y)
    disc = b * b - a2 + 1.0
    pts: list[CriticalPoint] = []
    if disc < 0.0:
        return pts
    rt = math.sqrt(disc)
    for c_raw, kind in ((b + rt, "plus"), (b - rt, "minus")):
        p = _make_point(c_raw, kind, disc)
        if p is not None and not p.at_boundary and 0.0 < p.t < t_max:
            pts.append(p)
    pts.sort(key=lambda p: p.t)
    return pts


def reduced_phase(x, y, point: CriticalPoint) -> float:
    """Phase value at a stationary point, with its boundary limits.

    At an interior point this is just psi(t); the t = 0 and t = pi/2
    collisions (y = +-x) have finite limits 0 and pi/2.
    """
    if point.at_boundary:
        return 0.0 if point.t == 0.0 else 0.5 * math.pi
    return float(phase_value(point.t, x, y))


def mixed_hessian(x, y, point: CriticalPoint) -> np.ndarray:
    """Mixed x-y second derivatives of the reduced phase at a stationary point.

    Eliminating t near a nondegenerate interior stationary point leaves a
    two-point phase whose mixed Hessian is

        -I/sin 2t - (4 / (sin 2t)^4 / psi'') * outer(x - y cos 2t, y - x cos 2t).

    Its eigenvalues are 0 (once) and -1/sin 2t (n-1 times).
    """
    x, y, _, _ = _pair(x, y)
    if point.at_boundary or point.degenerate:
        raise ValueError("mixed Hessian needs a nondegenerate interior point")
    c, s = point.cos2t, point.sin2t
    n = x.size
    outer = np.outer(x - y * c, y - x * c)
    return -np.eye(n) / s - (4.0 / (s**4 * point.curvature)) * outer
