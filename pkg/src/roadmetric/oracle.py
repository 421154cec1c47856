"""Independent lattice approximation of the relaxed metric.

Nodes of a square grid carry speed ``max(eps, v)`` where ``v`` is the fastest
road within half a grid step; moves follow a 16-neighbour stencil.  This has
nothing in common with the eps-graph construction and is used to check it.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .sampler import Scene


def lattice_speeds(s: Scene, lo, size: float, step: float, eps: float) -> np.ndarray:
    n = int(round(size / step)) + 1
    xs = lo[0] + step * np.arange(n)
    ys = lo[1] + step * np.arange(n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    speed = np.full((n, n), float(eps))
    for r in s.roads:
        if r.v <= eps:
            continue
        d = np.abs(-np.sin(r.line.theta) * X + np.cos(r.line.theta) * Y - r.line.w)
        speed = np.where(d <= 0.5 * step, np.maximum(speed, r.v), speed)
    return speed


def lattice_times(s: Scene, source_ij, lo=(-2.0, -2.0), size: float = 4.0,
                  step: float = 1.0 / 256, eps: float = 1.0) -> np.ndarray:
    """Travel-time field from grid node ``source_ij`` over the box
    ``[lo, lo + size]^2``."""
    speed = lattice_speeds(s, lo, size, step, eps)
    return kernels.lattice_dijkstra(1.0 / speed, step, source_ij)


def grid_point(ij, lo=(-2.0, -2.0), step: float = 1.0 / 256):
    return (lo[0] + step * ij[0], lo[1] + step * ij[1])
