"""Poisson road process in a disk window.

Roads hitting ``B(center, R)`` with speed at least ``v_min`` form a Poisson
process whose mean count is ``R * v_min ** -(beta - 1)``.  Each road gets its
own Philox substream keyed by ``(seed, road index)``, so a road's parameters do
not depend on how many roads were drawn before it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geometry import Line, Point, intersect, PARALLEL

_MASK64 = (1 << 64) - 1


def philox(seed: int, stream: int) -> np.random.Generator:
    """Generator for substream ``stream`` of ``seed``.

    Stream 0 draws the road count; stream ``i + 1`` draws road ``i``.
    """
    return np.random.Generator(np.random.Philox(key=((stream & _MASK64) << 64) | (seed & _MASK64)))


@dataclass(frozen=True)
class Road:
    id: int
    line: Line
    v: float


@dataclass(frozen=True)
class ScalingMap:
    anchor: Point
    ratio: float

    def __post_init__(self):
        if not self.ratio > 0:
            raise ValueError("scaling ratio must be positive")

    def point(self, p) -> Point:
        return Point(self.anchor[0] + self.ratio * p[0], self.anchor[1] + self.ratio * p[1])

    def speed_factor(self, beta: float) -> float:
        return self.ratio ** (1.0 / (beta - 1.0))

    def time_factor(self, beta: float) -> float:
        return self.ratio ** ((beta - 2.0) / (beta - 1.0))


@dataclass(frozen=True)
class Scene:
    roads: tuple[Road, ...]
    center: Point
    R: float
    v_min: float
    beta: float
    seed: int = 0

    def __len__(self) -> int:
        return len(self.roads)

    @cached_property
    def theta(self) -> np.ndarray:
        return np.array([r.line.theta for r in self.roads], dtype=float)

    @cached_property
    def w(self) -> np.ndarray:
        return np.array([r.line.w for r in self.roads], dtype=float)

    @cached_property
    def v(self) -> np.ndarray:
        return np.array([r.v for r in self.roads], dtype=float)

    @cached_property
    def ids(self) -> np.ndarray:
        return np.array([r.id for r in self.roads], dtype=np.int64)

    @cached_property
    def by_id(self) -> dict[int, Road]:
        return {r.id: r for r in self.roads}

    @property
    def v_max(self) -> float:
        return self.roads[0].v if self.roads else 0.0

    def subset(self, keep) -> "Scene":
        """Scene with only the roads at positions where ``keep`` is true."""
        roads = tuple(r for r, k in zip(self.roads, keep) if k)
        return Scene(roads, self.center, self.R, self.v_min, self.beta, self.seed)


def _sorted(roads) -> tuple[Road, ...]:
    return tuple(sorted(roads, key=lambda r: (-r.v, r.id)))


def make_scene(roads, center=(0.0, 0.0), R=1.0, v_min=None, beta=3.0, seed=0) -> Scene:
    """Scene from explicit ``(line, v)`` pairs or :class:`Road` objects."""
    out = []
    for i, r in enumerate(roads):
        if isinstance(r, Road):
            out.append(r)
        else:
            line, v = r
            out.append(Road(i, line, float(v)))
    if v_min is None:
        v_min = min((r.v for r in out), default=1.0)
    return Scene(_sorted(out), Point(*center), float(R), float(v_min), float(beta), int(seed))


def road_count(R: float, v_min: float, beta: float, seed: int) -> int:
    """Number of roads faster than ``v_min`` hitting a disk of radius ``R``."""
    return int(philox(seed, 0).poisson(R * v_min ** (-(beta - 1.0))))


def sample_scene(center, R: float, v_min: float, beta: float, seed: int) -> Scene:
    if not R > 0:
        raise ValueError("window radius must be positive")
    if not v_min > 0:
        raise ValueError("v_min must be positive")
    if not beta > 2:
        raise ValueError("beta must exceed 2")
    cx, cy = float(center[0]), float(center[1])
    n = road_count(R, v_min, beta, seed)
    roads = []
    for i in range(n):
        u = philox(seed, i + 1).random(3).tolist()
        theta = math.pi * u[0]
        offset = R * (2.0 * u[1] - 1.0)
        # 1 - u lies in (0, 1]
        v = v_min * (1.0 - u[2]) ** (-1.0 / (beta - 1.0))
        w = offset - math.sin(theta) * cx + math.cos(theta) * cy
        roads.append(Road(i, Line(theta, w), v))
    return Scene(_sorted(roads), Point(cx, cy), float(R), float(v_min), float(beta), int(seed))


def speed_from_uniform(u: float, v_min: float, beta: float) -> float:
    """Inverse tail: ``P(v >= t) = (t / v_min) ** -(beta - 1)``, ``u`` in (0, 1]."""
    return v_min * u ** (-1.0 / (beta - 1.0))


def scale_line(line: Line, m: ScalingMap) -> Line:
    s, c = math.sin(line.theta), math.cos(line.theta)
    return Line(line.theta, m.ratio * line.w - s * m.anchor[0] + c * m.anchor[1])


def scale_scene(s: Scene, m: ScalingMap) -> Scene:
    k = m.speed_factor(s.beta)
    roads = tuple(Road(r.id, scale_line(r.line, m), r.v * k) for r in s.roads)
    return Scene(roads, m.point(s.center), s.R * m.ratio, s.v_min * k, s.beta, s.seed)


def speed_at(s: Scene, p, tol: float = 0.0) -> float:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    for r in s.roads:  # sorted by speed, first hit is the max
        if r.line.distance(p) <= tol:
            return r.v
    return 0.0


def intersections(s: Scene) -> list[tuple[Point, int, int]]:
    by_id = sorted(s.roads, key=lambda r: r.id)
    out = []
    for a in range(len(by_id)):
        for b in range(a + 1, len(by_id)):
            p = intersect(by_id[a].line, by_id[b].line)
            if p is not PARALLEL:
                out.append((p, by_id[a].id, by_id[b].id))
    return out


def roads_hitting_ball(s: Scene, c, radius: float) -> np.ndarray:
    """Boolean mask over ``s.roads`` of lines passing through ``B(c, radius)``."""
    if not s.roads:
        return np.zeros(0, dtype=bool)
    d = -np.sin(s.theta) * c[0] + np.cos(s.theta) * c[1] - s.w
    return np.abs(d) <= radius
