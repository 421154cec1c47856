"""Geodesics of the relaxed metric: shortest paths, near-geodesics,
Kendall's recursive upper bound and eps sweeps."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .eps_graph import (
    OFF_ROAD,
    ExactnessCertificate,
    Graph,
    build_graph,
    build_graph_full,
    containment_certificate,
    degenerate_pairs,
    double_refraction_margin,
    relevant_roads,
)
from .geometry import Point, dist, point_segment_distance
from .sampler import Scene

MARGIN_FALLBACK = 1e-6
ROAD = "road"
STRAIGHT = "straight"


@dataclass(frozen=True)
class PathSegment:
    start: Point
    end: Point
    mode: str  # ROAD or STRAIGHT
    road: int | None
    speed: float
    time: float

    @property
    def length(self) -> float:
        return dist(self.start, self.end)


@dataclass(frozen=True)
class GeodesicPath:
    segments: tuple[PathSegment, ...]
    total_time: float
    node_keys: tuple = ()
    node_points: tuple = ()

    @property
    def points(self) -> list[Point]:
        if not self.segments:
            return []
        return [self.segments[0].start] + [s.end for s in self.segments]

    @property
    def roads_used(self) -> list[int]:
        return [s.road for s in self.segments if s.mode == ROAD]


@dataclass(frozen=True)
class BracketResult:
    eps: float
    t_eps: float
    kendall_ub: float
    certificate: ExactnessCertificate
    path: GeodesicPath | None = field(default=None, compare=False)
    mode: str = "exact"


def _segment(a, b, road, speed) -> PathSegment:
    a, b = Point(float(a[0]), float(a[1])), Point(float(b[0]), float(b[1]))
    mode = STRAIGHT if road is None else ROAD
    return PathSegment(a, b, mode, road, speed, dist(a, b) / speed)


def path_from_edges(g: Graph, edge_ids) -> GeodesicPath:
    """Assemble a path from CSR edge indices, merging consecutive edges on
    the same road and dropping zero-length pieces."""
    segs: list[PathSegment] = []
    keys = [g.keys[g.source]]
    kpts = [Point(float(g.pos[g.source, 0]), float(g.pos[g.source, 1]))]
    run_start = None
    run_road = None
    prev = None
    for e in edge_ids:
        t, h, r = int(g.tail[e]), int(g.head[e]), int(g.road[e])
        keys.append(g.keys[h])
        kpts.append(Point(float(g.pos[h, 0]), float(g.pos[h, 1])))
        road = None if r == OFF_ROAD else r
        if run_road is not None and road == run_road:
            prev = h
            continue
        if run_start is not None:
            segs.append(_segment(g.pos[run_start], g.pos[prev], run_road, _speed(g, run_road)))
        run_start, run_road, prev = t, road, h
        if road is None:
            segs.append(_segment(g.pos[t], g.pos[h], None, g.eps))
            run_start = run_road = None
    if run_start is not None:
        segs.append(_segment(g.pos[run_start], g.pos[prev], run_road, _speed(g, run_road)))
    segs = [s for s in segs if s.start != s.end]
    total = math.fsum(s.time for s in segs)
    return GeodesicPath(tuple(segs), total, tuple(keys), tuple(kpts))


def _speed(g: Graph, road):
    return g.eps if road is None else g.speeds[road]


def _edges_to(g: Graph, pred, node) -> list[int]:
    out = []
    while node != g.source:
        e = int(pred[node])
        if e < 0:
            raise RuntimeError("target unreachable")
        out.append(e)
        node = int(g.tail[e])
    out.reverse()
    return out


def _graph_for(sub: Scene, x, y, eps: float, margin: float) -> Graph:
    """Exact graph, or the validation graph restricted to the road pairs
    whose double-refraction margin is below ``MARGIN_FALLBACK``."""
    if margin > MARGIN_FALLBACK:
        return build_graph(sub, x, y, eps)
    return build_graph_full(sub, x, y, eps, pairs=degenerate_pairs(sub, eps, MARGIN_FALLBACK))


def shortest_path(g: Graph) -> GeodesicPath:
    dist_, pred = kernels.dijkstra_csr(g.indptr, g.head, g.weight, g.source, g.target)
    return path_from_edges(g, _edges_to(g, pred, g.target))


def t_eps(s: Scene, x, y, eps: float, prune: bool = True, kendall: bool = False,
          alpha: float = 0.3, depth_max: int = 16) -> BracketResult:
    """Relaxed driving time between ``x`` and ``y`` with certificates.

    The exact graph is used unless the double-refraction margin of the
    relevant roads is below ``MARGIN_FALLBACK``, in which case the
    validation-mode graph is used instead.
    """
    x, y = Point(float(x[0]), float(x[1])), Point(float(y[0]), float(y[1]))
    straight = dist(x, y) / eps
    if straight == 0.0:
        cert = containment_certificate(s, x, y, 0.0, eps, math.inf)
        return BracketResult(eps, 0.0, 0.0, cert, GeodesicPath((), 0.0, (("S",),)))
    sub = relevant_roads(s, x, y, eps) if prune else s
    margin = double_refraction_margin(sub, eps)
    mode = "exact"
    g = _graph_for(sub, x, y, eps, margin)
    if g.mode == "full":
        mode = "full"
    path = shortest_path(g)
    cert = containment_certificate(s, x, y, path.total_time, eps, margin)
    ub = math.inf
    if kendall:
        ub, _ = kendall_upper_bound(s, x, y, eps, alpha, depth_max)
    return BracketResult(eps, path.total_time, ub, cert, path, mode)


def kendall_upper_bound(s: Scene, x, y, eps: float, alpha: float = 0.3,
                        depth_max: int = 16) -> tuple[float, GeodesicPath]:
    """Recursive road-hopping construction between ``x`` and ``y``.

    For a pair ``(a, b)`` take the fastest road faster than ``eps`` meeting
    both ``B(a, alpha |a-b|)`` and ``B(b, alpha |a-b|)``, drive between the
    projections of ``a`` and ``b`` and recurse on the two remaining gaps.
    Gaps with no such road, or at depth ``depth_max``, are driven straight at
    speed ``eps``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    keep = s.v > eps if len(s) else np.zeros(0, dtype=bool)
    th, w, v, ids = s.theta[keep], s.w[keep], s.v[keep], s.ids[keep]
    co, si = np.cos(th), np.sin(th)
    segs: list[PathSegment] = []

    def rec(a, b, depth):
        gap = math.hypot(b[0] - a[0], b[1] - a[1])
        if gap == 0.0:
            return
        if depth >= depth_max or not len(v):
            segs.append(_segment(a, b, None, eps))
            return
        r = alpha * gap
        da = np.abs(-si * a[0] + co * a[1] - w)
        db = np.abs(-si * b[0] + co * b[1] - w)
        hit = np.flatnonzero((da <= r) & (db <= r))
        if not len(hit):
            segs.append(_segment(a, b, None, eps))
            return
        k = hit[0]  # roads are sorted fastest first
        ta = co[k] * a[0] + si[k] * a[1]
        tb = co[k] * b[0] + si[k] * b[1]
        pa = (ta * co[k] - w[k] * si[k], ta * si[k] + w[k] * co[k])
        pb = (tb * co[k] - w[k] * si[k], tb * si[k] + w[k] * co[k])
        rec(a, pa, depth + 1)
        if ta != tb:
            segs.append(_segment(pa, pb, int(ids[k]), float(v[k])))
        rec(pb, b, depth + 1)

    rec((float(x[0]), float(x[1])), (float(y[0]), float(y[1])), 0)
    segs = [sg for sg in segs if sg.start != sg.end]
    total = math.fsum(sg.time for sg in segs)
    return total, GeodesicPath(tuple(segs), total)


def eps_sweep(s: Scene, x, y, eps_list, alpha: float = 0.3, depth_max: int = 16,
              prune: bool = True) -> list[BracketResult]:
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    if any(e < s.v_min for e in eps_list):
        raise ValueError("eps below the scene speed cutoff")
    return [t_eps(s, x, y, e, prune=prune, kendall=True, alpha=alpha, depth_max=depth_max)
            for e in eps_list]


def polyline_hausdorff(p: list, q: list, per_segment: int = 16) -> float:
    """Hausdorff distance between polylines, evaluated on densely sampled
    points of each against the exact segments of the other."""
    def samples(pts):
        out = [pts[0]]
        for a, b in zip(pts, pts[1:]):
            for k in range(1, per_segment + 1):
                f = k / per_segment
                out.append((a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])))
        return out

    def directed(a_pts, b_pts):
        if len(b_pts) == 1:
            return max(dist(p_, b_pts[0]) for p_ in a_pts)
        return max(min(point_segment_distance(p_, u, w_) for u, w_ in zip(b_pts, b_pts[1:]))
                   for p_ in a_pts)

    if not p or not q:
        return 0.0 if not p and not q else math.inf
    return max(directed(samples(p), q), directed(samples(q), p))


def _yen(g: Graph, k: int, limit: float):
    """Loopless source-target edge paths in order of time (Yen)."""
    w0 = g.weight
    d, pred = kernels.dijkstra_csr(g.indptr, g.head, w0, g.source, g.target)
    if not np.isfinite(d[g.target]):
        return []
    first = _edges_to(g, pred, g.target)
    found = [(float(d[g.target]), first)]
    seen = {tuple(first)}
    cands: list = []
    while len(found) < k:
        _, last = found[-1]
        nodes = [g.source] + [int(g.head[e]) for e in last]
        for i in range(len(last)):
            spur = nodes[i]
            root = last[:i]
            w = w0.copy()
            for _, p in found:
                if p[:i] == root and len(p) > i:
                    w[p[i]] = np.inf
            for n in nodes[:i]:
                lo, hi = g.indptr[n], g.indptr[n + 1]
                w[lo:hi] = np.inf
                w[g.head == n] = np.inf
            ds, ps = kernels.dijkstra_csr(g.indptr, g.head, w, spur, g.target)
            if not np.isfinite(ds[g.target]):
                continue
            node, tail = g.target, []
            while node != spur:
                e = int(ps[node])
                tail.append(e)
                node = int(g.tail[e])
            tail.reverse()
            full = root + tail
            key = tuple(full)
            if key in seen:
                continue
            seen.add(key)
            cost = math.fsum(float(w0[e]) for e in full)
            heapq.heappush(cands, (cost, key))
        if not cands:
            break
        cost, key = heapq.heappop(cands)
        if cost > limit:
            break
        found.append((cost, list(key)))
    return found


def _kinked(p: GeodesicPath) -> bool:
    """Two straight legs meeting at an angle: a strict shortcut exists."""
    for a, b in zip(p.segments, p.segments[1:]):
        if a.mode == STRAIGHT and b.mode == STRAIGHT:
            ux, uy = a.end[0] - a.start[0], a.end[1] - a.start[1]
            vx, vy = b.end[0] - b.start[0], b.end[1] - b.start[1]
            if abs(ux * vy - uy * vx) > 1e-12 * a.length * b.length:
                return True
    return False


def k_near_geodesics(s: Scene, x, y, eps: float, k: int = 3, slack: float = 0.0,
                     prune: bool = True, distinct_tol: float = 1e-6) -> list[GeodesicPath]:
    """Up to ``k`` geometrically distinct loopless paths within ``slack`` of
    the geodesic time, fastest first.

    Candidates come from Yen's algorithm on the eps-graph.  Candidates with
    a bend between two straight legs are dropped (they are never locally
    shortest), and candidates whose polyline lies within ``distinct_tol``
    (Hausdorff) of an accepted path are collapsed into it.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    x, y = Point(float(x[0]), float(x[1])), Point(float(y[0]), float(y[1]))
    if x == y:
        return [GeodesicPath((), 0.0, (("S",),))]
    sub = relevant_roads(s, x, y, eps) if prune else s
    g = _graph_for(sub, x, y, eps, double_refraction_margin(sub, eps))
    best = shortest_path(g).total_time
    limit = best + slack
    accepted: list[GeodesicPath] = []
    budget = 4 * k + 4
    for cost, edges in _yen(g, budget, limit):
        p = path_from_edges(g, edges)
        if p.total_time > limit:
            break
        if _kinked(p):
            continue
        pts = p.points
        if any(polyline_hausdorff(pts, q.points) < distinct_tol for q in accepted):
            continue
        accepted.append(p)
        if len(accepted) == k:
            break
    accepted.sort(key=lambda p: p.total_time)
    return accepted


def audit_path(p: GeodesicPath, s: Scene, eps: float, tol: float = 1e-9) -> list[str]:
    """Speed-limit audit; returns a list of violations (empty when valid)."""
    problems = []
    for i, seg in enumerate(p.segments):
        if seg.mode == ROAD:
            road = s.by_id[seg.road]
            if abs(seg.speed - road.v) > 0:
                problems.append(f"segment {i}: speed {seg.speed} != road speed {road.v}")
            for q in (seg.start, seg.end):
                if road.line.distance(q) > tol:
                    problems.append(f"segment {i}: endpoint off road {seg.road}")
        elif seg.speed != eps:
            problems.append(f"segment {i}: straight speed {seg.speed} != eps")
        expect = seg.length / seg.speed
        if abs(seg.time - expect) > 1e-12 * max(1.0, expect):
            problems.append(f"segment {i}: time mismatch")
    for i, (a, b) in enumerate(zip(p.segments, p.segments[1:])):
        if a.end != b.start:
            problems.append(f"segments {i},{i + 1} not joined")
    if abs(p.total_time - math.fsum(sg.time for sg in p.segments)) > 1e-12 * max(1.0, p.total_time):
        problems.append("total time mismatch")
    return problems
