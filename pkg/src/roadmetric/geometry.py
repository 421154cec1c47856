"""Planar primitives: lines in angle/offset form, intersections, projections,
refraction points, and the integral-geometry measure of lines.

A line is stored as ``(theta, w)`` with ``theta`` in ``[0, pi)`` and ``w`` the
signed offset along the unit normal ``(-sin theta, cos theta)``.  Every point
of the line is ``t * (cos theta, sin theta) + w * (-sin theta, cos theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

PARALLEL_TOL = 1e-12
ON_LINE_TOL = 1e-12


class Point(NamedTuple):
    x: float
    y: float

    def __sub__(self, other):  # type: ignore[override]
        return Point(self.x - other[0], self.y - other[1])

    def __add__(self, other):  # type: ignore[override]
        return Point(self.x + other[0], self.y + other[1])

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


def dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


class _ParallelMarker:
    """Returned by :func:`intersect` for parallel lines."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "PARALLEL"

    def __bool__(self) -> bool:
        return False


PARALLEL = _ParallelMarker()


def _canonical(theta: float, w: float) -> tuple[float, float]:
    theta = math.fmod(theta, 2.0 * math.pi)
    if theta < 0.0:
        theta += 2.0 * math.pi
    if theta >= math.pi:
        theta -= math.pi
        w = -w
        # fmod residue can land exactly on pi after the subtraction above
        if theta >= math.pi:
            theta = 0.0
    return theta, w


@dataclass(frozen=True)
class Line:
    theta: float
    w: float

    def __post_init__(self):
        theta, w = _canonical(float(self.theta), float(self.w))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "w", w)

    @classmethod
    def through(cls, p, q) -> "Line":
        dx, dy = q[0] - p[0], q[1] - p[1]
        theta = math.atan2(dy, dx)
        n = (-math.sin(theta), math.cos(theta))
        return cls(theta, n[0] * p[0] + n[1] * p[1])

    @classmethod
    def from_point_angle(cls, p, theta: float) -> "Line":
        return cls(theta, -math.sin(theta) * p[0] + math.cos(theta) * p[1])

    @property
    def direction(self) -> tuple[float, float]:
        return (math.cos(self.theta), math.sin(self.theta))

    @property
    def normal(self) -> tuple[float, float]:
        return (-math.sin(self.theta), math.cos(self.theta))

    def point_at(self, t: float) -> Point:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Point(t * c - self.w * s, t * s + self.w * c)

    def abscissa(self, p) -> float:
        return p[0] * math.cos(self.theta) + p[1] * math.sin(self.theta)

    def signed_distance(self, p) -> float:
        return -p[0] * math.sin(self.theta) + p[1] * math.cos(self.theta) - self.w

    def distance(self, p) -> float:
        return abs(self.signed_distance(p))


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    @property
    def length(self) -> float:
        return dist(self.a, self.b)


@dataclass(frozen=True)
class ArcPolyline:
    vertices: tuple[Point, ...]
    total_length: float = field(default=0.0)


def angle_between(l1: Line, l2: Line) -> float:
    """Unsigned angle in ``[0, pi/2]`` between two undirected lines."""
    d = abs(l1.theta - l2.theta)
    d = min(d, math.pi - d)
    return d


def intersect(l1: Line, l2: Line):
    if angle_between(l1, l2) < PARALLEL_TOL:
        return PARALLEL
    # rows: normals, rhs: offsets
    a, b = -math.sin(l1.theta), math.cos(l1.theta)
    c, d = -math.sin(l2.theta), math.cos(l2.theta)
    det = a * d - b * c
    x = (l1.w * d - b * l2.w) / det
    y = (a * l2.w - l1.w * c) / det
    return Point(x, y)


def project(p, line: Line) -> Point:
    return line.point_at(line.abscissa(p))


def mu_ball(r: float) -> float:
    """Invariant measure of the lines hitting a closed disk of radius ``r``."""
    if r < 0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    return 2.0 * r


def mu_two_balls_mc(c1, r: float, c2, s: float, n: int, seed: int):
    """Monte-Carlo estimate of the measure of lines hitting two disjoint disks.

    Lines are drawn from the invariant measure restricted to those hitting
    ``B(c1, r)`` (total mass ``2r``) and the hit fraction on ``B(c2, s)`` is
    scaled by that mass.  Returns ``(estimate, standard_error)``.
    """
    d = dist(c1, c2)
    if r < 0 or s < 0:
        raise ValueError("radii must be nonnegative")
    if r + s >= d:
        raise ValueError("balls overlap")
    if s == 0 or r == 0:
        return 0.0, 0.0
    rng = np.random.Generator(np.random.Philox(seed))
    theta = rng.uniform(0.0, math.pi, n)
    off = rng.uniform(-r, r, n)
    nx, ny = -np.sin(theta), np.cos(theta)
    w = off + nx * c1[0] + ny * c1[1]
    hit = np.abs(nx * c2[0] + ny * c2[1] - w) <= s
    p = hit.mean()
    mass = mu_ball(r)
    return mass * p, mass * math.sqrt(p * (1.0 - p) / n)


# Calibrated envelope for mu<B(x,r); B(y,s)> * |x-y| / (r s) over disjoint
# disks; the far-field limit is 4/pi and touching disks stay below 2.
TWO_BALL_C_LOW = 1.0
TWO_BALL_C_HIGH = 2.5


def refraction_points(x, line: Line, v: float, eps: float) -> list[Point]:
    """Points of ``line`` where a straight leg from ``x`` at speed ``eps``
    meets the line at the refraction angle ``|cos| = eps / v``.

    Empty when the road is not faster than ``eps`` or ``x`` lies on it.
    """
    if eps <= 0 or v <= 0:
        raise ValueError("speeds must be positive")
    if eps >= v:
        return []
    h = line.distance(x)
    if h < ON_LINE_TOL:
        return []
    c = eps / v
    off = h * c / math.sqrt(1.0 - c * c)
    t0 = line.abscissa(x)
    return [line.point_at(t0 + off), line.point_at(t0 - off)]


def vertical_speed(line: Line, v: float, ref: Line) -> float:
    return abs(math.sin(line.theta - ref.theta)) * v


def psi(line: Line, ref: Line) -> float:
    s = abs(math.sin(line.theta - ref.theta))
    if s < PARALLEL_TOL:
        return math.inf
    return 1.0 / s


def _phi(rho: float, dot: float, v1: float, v2: float) -> float:
    return math.sqrt(max(0.0, 1.0 - 2.0 * dot * rho + rho * rho)) / (1.0 / v1 + rho / v2)


def no_shortcut_inf(dot: float, v1: float, v2: float) -> float:
    """Infimum over ``rho > 0`` of the no-shortcut functional.

    ``phi(rho) = sqrt(1 - 2 dot rho + rho^2) / (1/v1 + rho/v2)``.  Its only
    critical point is ``rho* = (b + a dot) / (a + b dot)`` with ``a = 1/v1``,
    ``b = 1/v2``; the boundary limits are ``v1`` and ``v2``.
    """
    if not 0.0 <= dot <= 1.0:
        raise ValueError(f"dot must lie in [0, 1], got {dot}")
    if not v1 >= v2 > 0:
        raise ValueError("need v1 >= v2 > 0")
    a, b = 1.0 / v1, 1.0 / v2
    rho = (b + a * dot) / (a + b * dot)
    return min(_phi(rho, dot, v1, v2), v1, v2)


def arc_polyline(x, y, rho: float) -> ArcPolyline:
    """Inscribed polyline along the shorter unit-circle arc from ``x`` to ``y``
    whose chords all stay farther than ``rho`` from the origin.

    Antipodal endpoints are joined counterclockwise.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    a0 = math.atan2(x[1], x[0])
    a1 = math.atan2(y[1], y[0])
    delta = math.remainder(a1 - a0, 2.0 * math.pi)
    if delta == -math.pi:
        delta = math.pi
    span = abs(delta)
    if span == 0.0:
        return ArcPolyline((Point(*x),), 0.0)
    max_step = 2.0 * math.acos(rho)
    k = max(1, math.ceil(span / max_step))
    if math.cos(span / (2 * k)) <= rho:
        k += 1
    step = delta / k
    verts = [Point(*x)]
    for i in range(1, k):
        a = a0 + i * step
        verts.append(Point(math.cos(a), math.sin(a)))
    verts.append(Point(*y))
    total = sum(dist(p, q) for p, q in zip(verts, verts[1:]))
    return ArcPolyline(tuple(verts), total)


def point_segment_distance(p, a, b) -> float:
    ax, ay = b[0] - a[0], b[1] - a[1]
    L2 = ax * ax + ay * ay
    if L2 == 0.0:
        return dist(p, a)
    t = ((p[0] - a[0]) * ax + (p[1] - a[1]) * ay) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(a[0] + t * ax - p[0], a[1] + t * ay - p[1])


def segments_intersect(p1, p2, q1, q2, tol: float = 1e-9) -> bool:
    """True when two closed segments come within ``tol`` of each other."""
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if ((o1 > 0 > o2) or (o1 < 0 < o2)) and ((o3 > 0 > o4) or (o3 < 0 < o4)):
        return True
    return min(
        point_segment_distance(q1, p1, p2),
        point_segment_distance(q2, p1, p2),
        point_segment_distance(p1, q1, q2),
        point_segment_distance(p2, q1, q2),
    ) <= tol


def clip_segment_outside_disk(a, b, center, radius):
    """Parts of segment ``[a, b]`` lying outside the open disk; list of pairs."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    fx, fy = a[0] - center[0], a[1] - center[1]
    A = dx * dx + dy * dy
    if A == 0.0:
        return [] if math.hypot(fx, fy) < radius else [(a, b)]
    B = 2.0 * (fx * dx + fy * dy)
    C = fx * fx + fy * fy - radius * radius
    disc = B * B - 4 * A * C
    if disc <= 0.0:
        return [(a, b)]
    sq = math.sqrt(disc)
    t1, t2 = (-B - sq) / (2 * A), (-B + sq) / (2 * A)
    out = []
    if t1 > 0.0:
        out.append((a, Point(a[0] + min(t1, 1.0) * dx, a[1] + min(t1, 1.0) * dy)))
    if t2 < 1.0:
        s = max(t2, 0.0)
        out.append((Point(a[0] + s * dx, a[1] + s * dy), b))
    return out
