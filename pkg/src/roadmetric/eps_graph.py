"""Finite graph whose shortest paths are the geodesics of the relaxed metric.

A geodesic that may leave the roads at speed ``eps`` only does so on its
first and last legs, and those legs meet their roads at refraction points.
The exact graph therefore needs only the terminals, the road crossings and
the refraction points of each terminal on each road faster than ``eps``.

Node keys are stable across ``eps`` values:

* ``("S",)`` / ``("T",)`` -- source and target
* ``("I", i, j)`` -- crossing of roads ``i < j``
* ``("R", road, side, sign)`` -- refraction point of terminal ``side`` on ``road``
* ``("H", road, k)`` / ``("L", node, road, sign)`` -- full-mode samples and hop landings
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .geometry import Point, dist
from .sampler import Scene, roads_hitting_ball

SNAP_TOL = 1e-9
OFF_ROAD = -1

KIND_TERMINAL = "terminal"
KIND_INTERSECTION = "intersection"
KIND_REFRACTION = "refraction"
KIND_SAMPLE = "sample"
KIND_LANDING = "landing"

_KIND_OF = {"S": KIND_TERMINAL, "T": KIND_TERMINAL, "I": KIND_INTERSECTION,
            "R": KIND_REFRACTION, "H": KIND_SAMPLE, "L": KIND_LANDING}


class Node(NamedTuple):
    id: int
    kind: str
    key: tuple
    position: Point


class Edge(NamedTuple):
    tail: int
    head: int
    road: int  # road id, or OFF_ROAD
    length: float
    weight: float

    @property
    def on_road(self) -> bool:
        return self.road != OFF_ROAD


@dataclass(frozen=True)
class ExactnessCertificate:
    double_refraction_margin: float
    containment_ok: bool
    containment_radius: float


class Graph:
    """Directed graph in CSR form plus node/edge metadata.

    Road edges are stored in both directions; off-road edges leave the source
    and enter the target only (exact mode).
    """

    def __init__(self, keys, pos, tail, head, road, length, weight, eps, speeds,
                 source, target, mode):
        self.keys = keys
        self.pos = pos
        self.eps = eps
        self.speeds = speeds  # road id -> speed
        self.source = source
        self.target = target
        self.mode = mode
        order = np.lexsort((head, tail))
        self.tail = tail[order]
        self.head = head[order]
        self.road = road[order]
        self.length = length[order]
        self.weight = weight[order]
        self.indptr = np.zeros(len(keys) + 1, dtype=np.int64)
        np.add.at(self.indptr, self.tail + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)

    @property
    def n_nodes(self) -> int:
        return len(self.keys)

    @property
    def n_edges(self) -> int:
        return len(self.tail)

    @cached_property
    def index(self) -> dict:
        return {k: i for i, k in enumerate(self.keys)}

    def node(self, i: int) -> Node:
        k = self.keys[i]
        return Node(i, _KIND_OF[k[0]], k, Point(float(self.pos[i, 0]), float(self.pos[i, 1])))

    @property
    def nodes(self) -> list[Node]:
        return [self.node(i) for i in range(self.n_nodes)]

    def edge(self, e: int) -> Edge:
        return Edge(int(self.tail[e]), int(self.head[e]), int(self.road[e]),
                    float(self.length[e]), float(self.weight[e]))

    @property
    def edges(self) -> list[Edge]:
        return [self.edge(e) for e in range(self.n_edges)]

    def dump(self) -> str:
        """Text dump: ``node id kind x y`` and ``edge from to kind length weight``."""
        lines = []
        for nd in self.nodes:
            lines.append(f"node {nd.id} {nd.kind} {nd.position.x:.17g} {nd.position.y:.17g}")
        for e in self.edges:
            kind = f"road:{e.road}" if e.on_road else "off"
            lines.append(f"edge {e.tail} {e.head} {kind} {e.length:.17g} {e.weight:.17g}")
        return "\n".join(lines) + "\n"


class _Builder:
    def __init__(self, scene: Scene, eps: float):
        keep = scene.v > eps if len(scene) else np.zeros(0, dtype=bool)
        self.theta = scene.theta[keep] if len(scene) else np.zeros(0)
        self.w = scene.w[keep] if len(scene) else np.zeros(0)
        self.v = scene.v[keep] if len(scene) else np.zeros(0)
        self.ids = scene.ids[keep] if len(scene) else np.zeros(0, dtype=np.int64)
        self.cos = np.cos(self.theta)
        self.sin = np.sin(self.theta)
        self.eps = eps
        self.keys: list[tuple] = []
        self.pos: list[np.ndarray] = []
        # on-road memberships: (road index, node id)
        self.mem_road: list[np.ndarray] = []
        self.mem_node: list[np.ndarray] = []
        self.edges: list[tuple] = []

    @property
    def n(self) -> int:
        return sum(len(p) for p in self.pos)

    def add_nodes(self, keys, pos) -> np.ndarray:
        start = self.n
        self.keys.extend(keys)
        self.pos.append(np.asarray(pos, dtype=float).reshape(-1, 2))
        return np.arange(start, start + len(keys))

    def on_roads(self, road_idx, node_ids):
        self.mem_road.append(np.asarray(road_idx, dtype=np.int64))
        self.mem_node.append(np.asarray(node_ids, dtype=np.int64))

    def abscissa(self, road_idx, pts):
        return pts[:, 0] * self.cos[road_idx] + pts[:, 1] * self.sin[road_idx]

    def signed_dist(self, p):
        return -self.sin * p[0] + self.cos * p[1] - self.w

    def foot(self, road_idx, t):
        c, s, w = self.cos[road_idx], self.sin[road_idx], self.w[road_idx]
        return np.stack([t * c - w * s, t * s + w * c], axis=-1)

    def terminal(self, key, p):
        """Add a terminal; snap it onto every road it lies on."""
        d = self.signed_dist(p)
        on = np.flatnonzero(np.abs(d) < SNAP_TOL)
        if len(on):
            k = on[0]
            q = self.foot(np.array([k]), np.array([self.cos[k] * p[0] + self.sin[k] * p[1]]))[0]
        else:
            q = np.asarray(p, dtype=float)
        nid = int(self.add_nodes([key], q)[0])
        if len(on):
            self.on_roads(on, np.full(len(on), nid))
        return nid, set(on.tolist())

    def intersections(self):
        m = len(self.v)
        if m < 2:
            return
        ii, jj = np.triu_indices(m, 1)
        det = -self.sin[ii] * self.cos[jj] + self.cos[ii] * self.sin[jj]
        ok = np.abs(det) >= np.sin(1e-12)
        ii, jj, det = ii[ok], jj[ok], det[ok]
        a, b = -self.sin[ii], self.cos[ii]
        c, d = -self.sin[jj], self.cos[jj]
        x = (self.w[ii] * d - b * self.w[jj]) / det
        y = (a * self.w[jj] - self.w[ii] * c) / det
        idi, idj = self.ids[ii], self.ids[jj]
        lo, hi = np.minimum(idi, idj), np.maximum(idi, idj)
        order = np.lexsort((hi, lo))
        keys = [("I", int(p), int(q)) for p, q in zip(lo[order], hi[order])]
        nodes = self.add_nodes(keys, np.stack([x[order], y[order]], axis=1))
        self.on_roads(np.concatenate([ii[order], jj[order]]), np.concatenate([nodes, nodes]))

    def refractions(self, side, p, skip):
        if not len(self.v):
            return
        h = np.abs(self.signed_dist(p))
        c = self.eps / self.v
        off = h * c / np.sqrt(1.0 - c * c)
        t0 = self.cos * p[0] + self.sin * p[1]
        idx = np.array([k for k in range(len(self.v)) if k not in skip and h[k] >= 1e-12],
                       dtype=np.int64)
        if not len(idx):
            return
        for sign in (1, -1):
            pts = self.foot(idx, t0[idx] + sign * off[idx])
            keys = [("R", int(self.ids[k]), side, sign) for k in idx]
            nodes = self.add_nodes(keys, pts)
            self.on_roads(idx, nodes)

    def road_chains(self):
        if not self.mem_road:
            return
        road = np.concatenate(self.mem_road)
        node = np.concatenate(self.mem_node)
        pos = np.concatenate(self.pos)
        t = self.abscissa(road, pos[node])
        order = np.lexsort((node, t, road))
        road, node, t = road[order], node[order], t[order]
        same = road[1:] == road[:-1]
        a, b = node[:-1][same], node[1:][same]
        r = road[:-1][same]
        keep = a != b
        a, b, r = a[keep], b[keep], r[keep]
        length = np.hypot(pos[a, 0] - pos[b, 0], pos[a, 1] - pos[b, 1])
        weight = length / self.v[r]
        rid = self.ids[r]
        self.edges.append((a, b, rid, length, weight))
        self.edges.append((b, a, rid, length, weight))

    def off_edges(self, tails, heads):
        tails = np.asarray(tails, dtype=np.int64)
        heads = np.asarray(heads, dtype=np.int64)
        keep = tails != heads
        tails, heads = tails[keep], heads[keep]
        pos = np.concatenate(self.pos)
        length = np.hypot(pos[tails, 0] - pos[heads, 0], pos[tails, 1] - pos[heads, 1])
        self.edges.append((tails, heads, np.full(len(tails), OFF_ROAD, dtype=np.int64),
                           length, length / self.eps))

    def finish(self, source, target, mode) -> Graph:
        pos = np.concatenate(self.pos) if self.pos else np.zeros((0, 2))
        if self.edges:
            tail, head, road, length, weight = (np.concatenate(c) for c in zip(*self.edges))
            _, first = np.unique(np.stack([tail, head, road]), axis=1, return_index=True)
            first.sort()
            tail, head, road, length, weight = (a[first] for a in (tail, head, road, length, weight))
        else:
            tail = head = road = np.zeros(0, dtype=np.int64)
            length = weight = np.zeros(0)
        speeds = {int(i): float(v) for i, v in zip(self.ids, self.v)}
        return Graph(self.keys, pos, tail.astype(np.int64), head.astype(np.int64),
                     road.astype(np.int64), length, weight, self.eps, speeds, source, target, mode)


def _check_eps(scene: Scene, eps: float):
    if not eps > 0:
        raise ValueError("eps must be positive")


def _base(scene: Scene, source, target, eps: float) -> tuple[_Builder, int, int | None]:
    _check_eps(scene, eps)
    b = _Builder(scene, eps)
    s, s_on = b.terminal(("S",), source)
    t, t_on = (None, set())
    if target is not None:
        t, t_on = b.terminal(("T",), target)
    b.intersections()
    b.refractions("S", source, s_on)
    if target is not None:
        b.refractions("T", target, t_on)
    return b, s, t


def build_graph(s: Scene, source, target, eps: float) -> Graph:
    """Exact-mode graph between two terminals.

    ``target=None`` builds a single-source graph (no target, no target
    refraction nodes) for multi-target queries.
    """
    b, si, ti = _base(s, source, target, eps)
    b.road_chains()
    n = b.n
    others = np.arange(n)
    b.off_edges(np.full(n, si), others)
    if ti is not None:
        b.off_edges(others[others != si], np.full(n - 1, ti))
    return b.finish(si, ti, "exact")


def containment_radius(source, target, upper_bound: float, v_max: float) -> tuple[Point, float]:
    """Disk around the midpoint containing the ellipse
    ``{z : |source - z| + |z - target| <= upper_bound * v_max}``."""
    mid = Point(0.5 * (source[0] + target[0]), 0.5 * (source[1] + target[1]))
    return mid, 0.5 * upper_bound * v_max


def build_graph_full(s: Scene, source, target, eps: float, samples: int = 64,
                     upper_bound: float | None = None, pairs=None) -> Graph:
    """Validation-mode graph: exact mode plus interior off-road hops.

    Adds ``samples`` equally spaced points per road inside the containment
    disk, off-road edges between road nodes lying on different roads, and for
    every road node the two refraction landing points on each other road.
    ``pairs`` (road id pairs) restricts the extra hops to those road pairs.
    """
    b, si, ti = _base(s, source, target, eps)
    n_exact = b.n
    # keep the exact-mode road edges even where samples split them
    b.road_chains()
    if len(b.v) and ti is not None:
        m = len(b.v)
        if pairs is None:
            allowed = np.ones((m, m), dtype=bool)
        else:
            pos_of = {int(r): k for k, r in enumerate(b.ids)}
            allowed = np.zeros((m, m), dtype=bool)
            for i, j in pairs:
                if i in pos_of and j in pos_of:
                    allowed[pos_of[i], pos_of[j]] = allowed[pos_of[j], pos_of[i]] = True
        np.fill_diagonal(allowed, False)
        involved = allowed.any(axis=1)
        if upper_bound is None:
            upper_bound = dist(source, target) / eps
        mid, rad = containment_radius(source, target, upper_bound, max(float(b.v.max()), eps))
        d = b.signed_dist(mid)
        half = np.sqrt(np.maximum(rad * rad - d * d, 0.0))
        t_mid = b.cos * mid[0] + b.sin * mid[1]
        for k in np.flatnonzero((np.abs(d) <= rad) & involved):
            ts = t_mid[k] + np.linspace(-half[k], half[k], samples)
            keys = [("H", int(b.ids[k]), j) for j in range(samples)]
            nodes = b.add_nodes(keys, b.foot(np.full(samples, k), ts))
            b.on_roads(np.full(samples, k), nodes)
        mem_r = np.concatenate(b.mem_road)
        mem_n = np.concatenate(b.mem_node)
        term = (mem_n == si) | (mem_n == ti)
        mem_r, mem_n = mem_r[~term], mem_n[~term]
        pos = np.concatenate(b.pos)
        c = eps / b.v
        kfac = c / np.sqrt(1.0 - c * c)
        src, kk, sg, ts = [], [], [], []
        tails, heads = [], []
        for k in range(m):
            on_k = np.unique(mem_n[mem_r == k])
            for j in np.flatnonzero(allowed[k]):
                on_j = np.unique(mem_n[mem_r == j])
                ta, hb = np.meshgrid(on_k, on_j, indexing="ij")
                tails.append(ta.ravel())
                heads.append(hb.ravel())
                p = pos[on_k]
                h = np.abs(-b.sin[j] * p[:, 0] + b.cos[j] * p[:, 1] - b.w[j])
                ok = h >= 1e-12
                t0 = b.cos[j] * p[ok, 0] + b.sin[j] * p[ok, 1]
                for sign in (1, -1):
                    src.append(on_k[ok])
                    kk.append(np.full(ok.sum(), j))
                    sg.append(np.full(ok.sum(), sign))
                    ts.append(t0 + sign * h[ok] * kfac[j])
        if tails:
            b.off_edges(np.concatenate(tails), np.concatenate(heads))
        if src:
            src_a, kk_a = np.concatenate(src), np.concatenate(kk)
            sg_a, ts_a = np.concatenate(sg), np.concatenate(ts)
            keys = [("L", int(a), int(b.ids[j]), int(g)) for a, j, g in zip(src_a, kk_a, sg_a)]
            land = b.add_nodes(keys, b.foot(kk_a, ts_a))
            b.on_roads(kk_a, land)
            b.off_edges(np.concatenate([src_a, land]), np.concatenate([land, src_a]))
    b.road_chains()
    n = b.n
    others = np.arange(n)
    b.off_edges(np.full(n, si), others)
    if ti is not None:
        b.off_edges(others[others != si], np.full(n - 1, ti))
    g = b.finish(si, ti, "full")
    g.n_exact_nodes = n_exact
    return g


def _pair_margins(s: Scene, eps: float):
    keep = s.v > eps
    th, v, ids = s.theta[keep], s.v[keep], s.ids[keep]
    if len(v) < 2:
        return np.zeros(0), np.zeros((0, 2), dtype=np.int64)
    ii, jj = np.triu_indices(len(v), 1)
    c1, s1 = np.cos(th[ii]), np.sin(th[ii])
    c2, s2 = np.cos(th[jj]), np.sin(th[jj])
    det = c1 * s2 - s1 * c2
    ok = np.abs(det) >= 1e-12
    ii, jj = ii[ok], jj[ok]
    c1, s1, c2, s2, det = c1[ok], s1[ok], c2[ok], s2[ok], det[ok]
    r1, r2 = eps / v[ii], eps / v[jj]
    best = np.full(len(ii), np.inf)
    for g1 in (1.0, -1.0):
        for g2 in (1.0, -1.0):
            b1, b2 = g1 * r1, g2 * r2
            ex = (b1 * s2 - s1 * b2) / det
            ey = (c1 * b2 - b1 * c2) / det
            best = np.minimum(best, np.abs(ex * ex + ey * ey - 1.0))
    return best, np.stack([ids[ii], ids[jj]], axis=1)


def double_refraction_margin(s: Scene, eps: float) -> float:
    """Distance from the nearest road pair admitting a unit direction with
    ``|<e, dir_i>| = eps/v_i`` and ``|<e, dir_j>| = eps/v_j``.

    For each pair and sign choice the 2x2 system is solved linearly and the
    margin is ``| |e|^2 - 1 |``; the minimum over all pairs is returned
    (``inf`` when no non-parallel pair of roads is faster than ``eps``).
    """
    _check_eps(s, eps)
    if not len(s):
        return math.inf
    best, _ = _pair_margins(s, eps)
    return float(best.min()) if len(best) else math.inf


def degenerate_pairs(s: Scene, eps: float, threshold: float) -> list[tuple[int, int]]:
    """Road id pairs whose double-refraction margin is at most ``threshold``."""
    _check_eps(s, eps)
    if not len(s):
        return []
    best, pairs = _pair_margins(s, eps)
    return [(int(a), int(b_)) for a, b_ in pairs[best <= threshold]]


def containment_certificate(s: Scene, source, target, upper_bound: float,
                            eps: float = 0.0, margin: float = math.inf) -> ExactnessCertificate:
    """Check that no path of time ``<= upper_bound`` can leave the window.

    The ellipse of reachable points is bounded by the disk returned by
    :func:`containment_radius` using the fastest available speed
    ``max(v_max, eps)``.
    """
    vmax = max(s.v_max, eps)
    mid, rad = containment_radius(source, target, upper_bound, vmax)
    if dist(source, target) == 0.0:
        ok = True
    else:
        ok = dist(mid, s.center) + rad <= s.R
    return ExactnessCertificate(margin, bool(ok), rad)


def _single_road_upper_bound(s: Scene, x, y, eps: float) -> float:
    """Fastest path using at most one road, entering and leaving at the
    refraction angle when that ordering is consistent."""
    best = dist(x, y) / eps
    keep = s.v > eps
    if not keep.any():
        return best
    th, w, v = s.theta[keep], s.w[keep], s.v[keep]
    co, si = np.cos(th), np.sin(th)
    px, py = co * x[0] + si * x[1], co * y[0] + si * y[1]
    hx = np.abs(-si * x[0] + co * x[1] - w)
    hy = np.abs(-si * y[0] + co * y[1] - w)
    c = eps / v
    k = c / np.sqrt(1.0 - c * c)
    sg = np.where(py >= px, 1.0, -1.0)
    a = px + sg * hx * k
    b = py - sg * hy * k
    bad = sg * (b - a) < 0
    m = 0.5 * (px + py)
    a = np.where(bad, m, a)
    b = np.where(bad, m, b)
    ax, ay = a * co - w * si, a * si + w * co
    bx, by = b * co - w * si, b * si + w * co
    t = (np.hypot(ax - x[0], ay - x[1]) + np.hypot(bx - y[0], by - y[1])) / eps + np.abs(b - a) / v
    return min(best, float(t.min()))


def relevant_roads(s: Scene, x, y, eps: float, upper_bound: float | None = None) -> Scene:
    """Drop roads that no path of time ``<= upper_bound`` can touch.

    A path faster than ``upper_bound`` stays in the ellipse with foci ``x, y``
    and string length ``upper_bound * V``, where ``V`` is the top speed among
    roads meeting that ellipse.  Shrinking the enclosing disk until the road
    set is stable gives a set that provably contains every usable road.
    """
    keep = s.v > eps if len(s) else np.zeros(0, dtype=bool)
    if not keep.any():
        return s.subset(keep)
    if upper_bound is None:
        upper_bound = _single_road_upper_bound(s, x, y, eps)
    mid = (0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1]))
    vtop = max(float(s.v[keep].max()), eps)
    while True:
        rad = 0.5 * upper_bound * vtop * (1.0 + 1e-12) + 1e-12
        mask = keep & roads_hitting_ball(s, mid, rad)
        new_top = max(float(s.v[mask].max()), eps) if mask.any() else eps
        if new_top >= vtop:
            return s.subset(mask)
        vtop = new_top
