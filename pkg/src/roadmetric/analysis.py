"""Empirical checks of the structural results and exploratory scanners.

Every report is a frozen dataclass; :func:`to_record` turns one into a plain
dict with a ``kind`` field for JSON-lines output.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy import stats

from . import kernels
from .eps_graph import build_graph
from .geometry import (
    PARALLEL,
    Point,
    clip_segment_outside_disk,
    dist,
    intersect,
    no_shortcut_inf,
    segments_intersect,
)
from .sampler import Scene, road_count, roads_hitting_ball, sample_scene
from .solver import (
    ROAD,
    STRAIGHT,
    GeodesicPath,
    PathSegment,
    eps_sweep,
    k_near_geodesics,
    t_eps,
)

KS_CRIT_1PCT = 1.628
DEFAULT_SLACK = 1e-9


def to_record(report) -> dict:
    """Plain-dict form of a report, tagged with its ``kind``."""
    rec = {"kind": type(report).__name__}
    for f in dataclasses.fields(report):
        if f.metadata.get("record", True):
            rec[f.name] = _plain(getattr(report, f.name))
    return rec


def _plain(v):
    if isinstance(v, Point):
        return [v.x, v.y]
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def run_batch(fn, items, workers: int = 1) -> list:
    """``[fn(item) for item in items]``, optionally over a process pool.

    Results come back in input order, so the output does not depend on the
    number of workers.
    """
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------- no pause


@dataclass(frozen=True)
class PauseProfile:
    interior_min_speed: float | None
    endpoint_speed_decay: tuple
    stabilized: bool
    interior_roads: tuple = ()
    identical: bool = False
    eps: tuple = ()
    times: tuple = ()


def _road_run(p: GeodesicPath) -> list[int]:
    return [sg.road for sg in p.segments if sg.mode == ROAD]


def _interior_keys(p: GeodesicPath) -> tuple:
    keys = [k for k in p.node_keys if k[0] not in ("S", "T")]
    return tuple(keys)


def _find_run(needle: list, hay: list) -> int:
    n = len(needle)
    for i in range(len(hay) - n + 1):
        if hay[i:i + n] == needle:
            return i
    return -1


def _longest_common_run(a: list, b: list) -> tuple[int, int]:
    """(start in ``b``, length) of the longest common contiguous run."""
    best = (0, 0)
    prev = [0] * (len(b) + 1)
    for i in range(len(a)):
        cur = [0] * (len(b) + 1)
        for j in range(len(b)):
            if a[i] == b[j]:
                cur[j + 1] = prev[j] + 1
                if cur[j + 1] > best[1]:
                    best = (j - cur[j + 1] + 1, cur[j + 1])
        prev = cur
    return best


def no_pause_profile(s: Scene, x, y, eps_list) -> PauseProfile:
    """Geodesics over a decreasing eps sweep and the stability of their
    interior.

    The interior of the coarser of the last two paths is its road sequence
    without the first and last roads, whose attachment to the terminals is
    refined as slower roads become usable.  The profile is stabilized when
    that interior reappears unchanged, as a contiguous run, in the finer
    path.  ``interior_min_speed`` is the slowest road on the longest road run
    shared by the two paths.
    """
    eps_list = list(eps_list)
    if len(eps_list) < 2:
        raise ValueError("need at least two eps values")
    res = eps_sweep(s, x, y, eps_list)
    coarse, fine = res[-2].path, res[-1].path
    a, b = _road_run(coarse), _road_run(fine)
    speeds = {sg.road: sg.speed for sg in fine.segments if sg.mode == ROAD}
    start, n = _longest_common_run(a, b)
    shared = b[start:start + n]
    if not a and not b:
        stabilized = True
    else:
        stabilized = bool(a) and n > 0 and _find_run(a[1:-1], b) >= 0
    vmin = min(speeds[r] for r in shared) if shared else None
    decay, t = [], 0.0
    for sg in fine.segments:
        decay.append((t, sg.speed))
        t += sg.time
    return PauseProfile(
        interior_min_speed=vmin,
        endpoint_speed_decay=tuple(decay),
        stabilized=stabilized,
        interior_roads=tuple(shared),
        identical=_interior_keys(coarse) == _interior_keys(fine),
        eps=tuple(r.eps for r in res),
        times=tuple(r.t_eps for r in res),
    )


def structure_check(p: GeodesicPath) -> bool:
    """True when straight pieces occur only as first or last segment."""
    last = len(p.segments) - 1
    return all(sg.mode != STRAIGHT or i in (0, last) for i, sg in enumerate(p.segments))


# -------------------------------------------------------------------- hubs


@dataclass(frozen=True)
class HubReport:
    intersection: Point
    roads: tuple[int, int]
    v_i: float
    v_j: float
    inf_phi: float
    eps_used: float
    delta_used: float
    arm_times: tuple
    through_times: tuple
    all_geodesic: bool
    applicable: bool = True


def hub_check(s: Scene, i: int, j: int, delta: float, eps: float | None = None,
              shrink_max: int = 30) -> HubReport:
    """Drive-through test at the crossing of roads ``i`` and ``j``.

    Arms are the four points at distance ``delta`` from the crossing along
    the two roads.  For every pair of arms the solver time is compared with
    the time of driving through the crossing.  ``eps`` defaults to half the
    no-shortcut threshold; ``delta`` is halved until no third road faster
    than ``eps`` meets ``B(x, (1 + 2 v_fast / v_slow) delta)``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    ri, rj = s.by_id[i], s.by_id[j]
    x = intersect(ri.line, rj.line)
    if x is PARALLEL:
        raise ValueError("roads are parallel")
    di, dj = ri.line.direction, rj.line.direction
    dot = abs(di[0] * dj[0] + di[1] * dj[1])
    fast, slow = max(ri.v, rj.v), min(ri.v, rj.v)
    inf_phi = no_shortcut_inf(dot, fast, slow)
    eps_used = 0.5 * inf_phi if eps is None else float(eps)
    applicable = 0.0 < eps_used < inf_phi
    others = np.array([r.id not in (i, j) and r.v > eps_used for r in s.roads], dtype=bool)
    for _ in range(shrink_max):
        if not (others & roads_hitting_ball(s, x, (1.0 + 2.0 * fast / slow) * delta)).any():
            break
        delta *= 0.5
    else:
        applicable = False
    arms = [Point(x.x + sg * d[0] * delta, x.y + sg * d[1] * delta)
            for d in (di, dj) for sg in (1.0, -1.0)]
    arm_v = [ri.v, ri.v, rj.v, rj.v]
    arm_road = [i, i, j, j]
    times = [[0.0] * 4 for _ in range(4)]
    through = [[0.0] * 4 for _ in range(4)]
    ok = applicable
    for a in range(4):
        for b in range(a + 1, 4):
            if applicable:
                t = t_eps(s, arms[a], arms[b], eps_used).t_eps
            else:
                t = math.nan
            if arm_road[a] == arm_road[b]:
                segs = [PathSegment(arms[a], arms[b], ROAD, arm_road[a], arm_v[a],
                                    dist(arms[a], arms[b]) / arm_v[a])]
            else:
                segs = [PathSegment(arms[a], x, ROAD, arm_road[a], arm_v[a], dist(arms[a], x) / arm_v[a]),
                        PathSegment(x, arms[b], ROAD, arm_road[b], arm_v[b], dist(x, arms[b]) / arm_v[b])]
            thr = math.fsum(sg.time for sg in segs)
            times[a][b] = times[b][a] = t
            through[a][b] = through[b][a] = thr
            if applicable and abs(t - thr) > 1e-9:
                ok = False
    return HubReport(
        intersection=x, roads=(i, j), v_i=ri.v, v_j=rj.v, inf_phi=inf_phi,
        eps_used=eps_used, delta_used=delta,
        arm_times=tuple(tuple(r) for r in times),
        through_times=tuple(tuple(r) for r in through),
        all_geodesic=bool(ok), applicable=bool(applicable),
    )


def through_time_arithmetic(delta: float, v_a: float, v_b: float) -> float:
    return delta / v_a + delta / v_b


# -------------------------------------------------------------- confluence


@dataclass(frozen=True)
class ConfluenceTree:
    target: Point
    leaves: tuple
    coalescence: tuple  # (Point, frozenset of leaf indices)
    cut_points: tuple
    coalescence_radii: tuple
    paths: tuple = field(default=(), metadata={"record": False})
    edges: tuple = field(default=(), metadata={"record": False})

    def audit(self) -> list[str]:
        """Structural problems: repeated nodes on a path, or a graph node
        reached through two different suffixes (not a tree)."""
        problems = []
        where: dict = {}
        for leaf, seq in enumerate(self.paths):
            if len(set(seq)) != len(seq):
                problems.append(f"leaf {leaf}: path revisits a node")
            for k in range(len(seq)):
                suffix = tuple(seq[k:])
                prev = where.setdefault(seq[k], suffix)
                if prev != suffix:
                    problems.append(f"leaf {leaf}: node {seq[k]} reached through two suffixes")
        g = nx.DiGraph()
        g.add_edges_from(self.edges)
        if g.number_of_nodes() and not nx.is_forest(g.to_undirected()):
            problems.append("union of paths contains a cycle")
        return problems


def _relabel(k, leaf):
    if k == ("S",):
        return ("S", leaf)
    if k[0] == "R" and k[2] == "S":
        return ("R", k[1], ("S", leaf), k[3])
    return k


def _leaf_keys(s: Scene, p: GeodesicPath, leaf: int, eps: float):
    """Canonical node sequence of a path: its turning nodes plus every
    crossing with a road faster than ``eps`` passed while driving.

    Crossings come from the whole scene, so the sequence does not depend on
    which roads the solver pruned for this particular query.
    """
    key_at = {}
    for k, q in zip(p.node_keys, p.node_points):
        key_at.setdefault(q, _relabel(k, leaf))
    fast = [r for r in s.roads if r.v > eps]
    keys, pts = [("S", leaf)], [p.segments[0].start if p.segments else None]
    for sg in p.segments:
        if sg.mode == ROAD:
            line = s.by_id[sg.road].line
            ta, tb = line.abscissa(sg.start), line.abscissa(sg.end)
            lo, hi = min(ta, tb), max(ta, tb)
            cross = []
            for r in fast:
                if r.id == sg.road:
                    continue
                z = intersect(line, r.line)
                if z is PARALLEL:
                    continue
                t = line.abscissa(z)
                if lo + 1e-12 < t < hi - 1e-12:
                    a, b = sorted((sg.road, r.id))
                    cross.append((t if tb >= ta else -t, ("I", a, b), z))
            for _, k, z in sorted(cross):
                keys.append(k)
                pts.append(z)
        keys.append(key_at[sg.end])
        pts.append(sg.end)
    out_k, out_p = [], []
    for k, z in zip(keys, pts):
        if not out_k or out_k[-1] != k:
            out_k.append(k)
            out_p.append(z)
    return out_k, out_p


def confluence_tree(s: Scene, target, sources, eps: float) -> ConfluenceTree:
    """Union of the geodesics from ``sources`` to ``target`` as a trie
    rooted at the target.

    A coalescence node is where two or more leaves first share all remaining
    nodes to the target; those are the reported cut points.
    """
    target = Point(float(target[0]), float(target[1]))
    sources = [Point(float(p[0]), float(p[1])) for p in sources]
    if any(p == target for p in sources):
        raise ValueError("sources must differ from the target")
    seqs, pos = [], {}
    for leaf, src in enumerate(sources):
        p = t_eps(s, src, target, eps).path
        keys, pts = _leaf_keys(s, p, leaf, eps)
        for k, q in zip(keys, pts):
            pos.setdefault(k, q)
        seqs.append(tuple(keys))
    # trie on reversed sequences; a node is identified by its suffix
    below: dict = {}
    children: dict = {}
    for leaf, seq in enumerate(seqs):
        rev = seq[::-1]
        for d in range(1, len(rev) + 1):
            node = rev[:d]
            below.setdefault(node, set()).add(leaf)
            if d < len(rev):
                children.setdefault(node, set()).add(rev[d])
    coal = []
    for node, kids in children.items():
        leaves_here = below[node]
        ends_here = any(len(seqs[lf]) == len(node) for lf in leaves_here)
        if len(leaves_here) >= 2 and (len(kids) >= 2 or ends_here):
            coal.append((pos[node[-1]], frozenset(leaves_here), len(node)))
    coal.sort(key=lambda c: (-c[2], c[0]))
    edges = {(seq[k], seq[k + 1]) for seq in seqs for k in range(len(seq) - 1)}
    return ConfluenceTree(
        target=target,
        leaves=tuple(sources),
        coalescence=tuple((c[0], tuple(sorted(c[1]))) for c in coal),
        cut_points=tuple(c[0] for c in coal),
        coalescence_radii=tuple(dist(c[0], target) for c in coal),
        paths=tuple(seqs),
        edges=tuple(sorted(edges, key=repr)),
    )


# --------------------------------------------------------------- cut locus


@dataclass(frozen=True)
class CutLocusSample:
    origin: Point
    hits: tuple  # (Point, multiplicity, time gap)
    triple_hits: tuple
    spacing: float
    n_points: int


def _grid(origin, spacing: float, extent: float) -> list[Point]:
    m = int(math.floor(extent / spacing + 1e-9))
    out = []
    for a in range(-m, m + 1):
        for b in range(-m, m + 1):
            if a or b:
                out.append(Point(origin[0] + a * spacing, origin[1] + b * spacing))
    return out


def cut_locus_scan(s: Scene, origin, spacing: float, extent: float, eps: float,
                   slack: float | None = None, k: int = 3) -> CutLocusSample:
    """Grid points around ``origin`` (square of half-width ``extent``) having
    two or more geometrically distinct near-geodesics to it.

    ``slack`` defaults to ``1e-9`` times the geodesic time of each point.
    A unique geodesic that barely clips a road has a near-twin whose time
    gap grows only quadratically with its offset, so a looser default
    reports such points as spurious ties.
    """
    if not spacing > 0 or not extent > 0:
        raise ValueError("spacing and extent must be positive")
    origin = Point(float(origin[0]), float(origin[1]))
    hits, triples = [], []
    pts = _grid(origin, spacing, extent)
    for z in pts:
        sl = slack
        if sl is None:
            sl = DEFAULT_SLACK * t_eps(s, z, origin, eps).t_eps
        paths = k_near_geodesics(s, z, origin, eps, k=k, slack=sl)
        if len(paths) >= 2:
            gap = paths[-1].total_time - paths[0].total_time
            hits.append((z, len(paths), gap))
            if len(paths) >= 3:
                triples.append((z, len(paths), gap))
    return CutLocusSample(origin, tuple(hits), tuple(triples), spacing, len(pts))


def box_counts(points, sizes) -> list[tuple[float, int]]:
    """Number of occupied boxes of each side length (exploratory only)."""
    pts = np.asarray([tuple(p) for p in points], dtype=float).reshape(-1, 2)
    out = []
    for h in sizes:
        if not len(pts):
            out.append((float(h), 0))
            continue
        cells = {tuple(c) for c in np.floor(pts / h).astype(np.int64).tolist()}
        out.append((float(h), len(cells)))
    return out


# ------------------------------------------------------------------- stars


def star_arms(s: Scene, p, eps: float, delta: float, probes: int = 24,
              phase: float | None = None) -> int:
    """Largest set of geodesics from ``p`` to points of the circle of radius
    ``delta`` that are pairwise disjoint outside ``B(p, delta / 100)``.

    By default the probe angles sit half a probe spacing off the direction
    of the fastest road through ``p``, so that no probe is almost
    perpendicular to it; such a probe is reached by a straight leg that
    separates from the road inside the core and counts as an extra arm.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    p = Point(float(p[0]), float(p[1]))
    if phase is None:
        phase = 0.1
        for r in s.roads:  # fastest first
            if r.v > eps and r.line.distance(p) <= 1e-9:
                phase = r.line.theta + math.pi / probes
                break
    core = delta / 100.0
    pieces = []
    for k in range(probes):
        a = phase + 2.0 * math.pi * k / probes
        q = Point(p.x + delta * math.cos(a), p.y + delta * math.sin(a))
        pts = t_eps(s, p, q, eps).path.points
        segs = []
        for u, v in zip(pts, pts[1:]):
            segs.extend(clip_segment_outside_disk(u, v, p, core))
        pieces.append(segs)
    g = nx.Graph()
    g.add_nodes_from(range(probes))
    for a in range(probes):
        for b in range(a + 1, probes):
            if not any(segments_intersect(u1, v1, u2, v2)
                       for u1, v1 in pieces[a] for u2, v2 in pieces[b]):
                g.add_edge(a, b)
    clique, _ = nx.max_weight_clique(g, weight=None)
    return len(clique)


# ----------------------------------------------------------------- scaling


@dataclass(frozen=True)
class ScalingReport:
    beta: float
    radii: tuple
    samples: tuple  # per radius, raw times
    slope: float
    expected_slope: float
    ks_statistic: float
    ks_critical: float
    implied_dimension: float
    sample_sizes: tuple


def _scaling_trial(args) -> float:
    beta, r, eps0, R0, seed = args
    vr = eps0 * r ** (1.0 / (beta - 1.0))
    s = sample_scene((0.5 * r, 0.0), R0 * r, vr, beta, seed)
    return t_eps(s, (0.0, 0.0), (r, 0.0), vr).t_eps


def scaling_exponent(beta: float, radii, trials: int, eps0: float, seed: int,
                     R0: float = 2.0, workers: int = 1) -> ScalingReport:
    """Growth of ``t_eps(0, r e1)`` with ``r`` on freshly sampled scenes.

    The window, cutoff speed and eps scale together with ``r`` so that the
    normalized times ``r ** -((beta-2)/(beta-1)) * T`` share one law.
    """
    radii = [float(r) for r in radii]
    if len(radii) < 2:
        raise ValueError("need at least two radii")
    if trials < 1:
        raise ValueError("trials must be positive")
    expo = (beta - 2.0) / (beta - 1.0)
    samples = []
    for ri, r in enumerate(radii):
        items = [(beta, r, eps0, R0, seed + 1_000_003 * ri + t) for t in range(trials)]
        samples.append(tuple(run_batch(_scaling_trial, items, workers)))
    med = [float(np.median(x)) for x in samples]
    slope = float(np.polyfit(np.log(radii), np.log(med), 1)[0])
    lo = np.asarray(samples[0]) * radii[0] ** -expo
    hi = np.asarray(samples[-1]) * radii[-1] ** -expo
    ks = float(stats.ks_2samp(lo, hi).statistic)
    n, m = len(lo), len(hi)
    return ScalingReport(
        beta=beta, radii=tuple(radii), samples=tuple(samples), slope=slope,
        expected_slope=expo, ks_statistic=ks,
        ks_critical=KS_CRIT_1PCT * math.sqrt((n + m) / (n * m)),
        implied_dimension=2.0 * (beta - 1.0) / (beta - 2.0),
        sample_sizes=tuple(len(x) for x in samples),
    )


# ----------------------------------------------------------------- poisson


@dataclass(frozen=True)
class PoissonCheck:
    mean: float
    variance: float
    expected: float
    passed: bool


def poisson_law_check(R: float, v0: float, beta: float, trials: int, seed: int) -> PoissonCheck:
    """Mean and variance of road counts against the Poisson parameter
    ``R * v0 ** -(beta - 1)``, each within four standard errors."""
    if trials < 2:
        raise ValueError("trials must be at least 2")
    lam = R * v0 ** (-(beta - 1.0))
    counts = np.array([road_count(R, v0, beta, seed + t) for t in range(trials)], dtype=float)
    mean = float(counts.mean())
    var = float(counts.var(ddof=1))
    se_mean = math.sqrt(lam / trials)
    # variance of the sample variance for Poisson data
    se_var = math.sqrt((lam + 2.0 * lam * lam) / trials)
    ok = abs(mean - lam) <= 4 * se_mean and abs(var - lam) <= 4 * se_var
    return PoissonCheck(mean, var, lam, bool(ok))


# ------------------------------------------------------------------- balls


@dataclass(frozen=True)
class BallRaster:
    center: Point
    eps: float
    xs: np.ndarray = field(metadata={"record": False})
    ys: np.ndarray = field(metadata={"record": False})
    times: np.ndarray = field(metadata={"record": False})  # times[iy, ix]
    radii: tuple = ()

    def sublevel(self, t: float) -> np.ndarray:
        return self.times <= t


def _exit_times(d, h, v, eps):
    """Fastest way from a road point to a point at road-abscissa offset ``d``
    and distance ``h``: drive, then leave at the refraction angle, or go
    straight when the refraction point lies behind."""
    c = eps / v
    root = math.sqrt(1.0 - c * c)
    k = c / root
    drive = (d - h * k) / v + h / (eps * root)
    straight = np.hypot(d, h) / eps
    return np.where(d >= h * k, drive, straight)


def ball_raster(s: Scene, center, eps: float, radii=(), resolution: int = 64,
                half_width: float | None = None, chunk: int = 1 << 22) -> BallRaster:
    """Relaxed travel times from ``center`` to every cell of a square grid.

    One Dijkstra run from ``center`` gives times at all road nodes; a cell
    is then reached either straight from ``center`` or from a node along
    its road followed by an optimal exit leg.
    """
    if resolution < 32:
        raise ValueError("resolution must be at least 32")
    center = Point(float(center[0]), float(center[1]))
    hw = s.R if half_width is None else float(half_width)
    xs = s.center.x + np.linspace(-hw, hw, resolution)
    ys = s.center.y + np.linspace(-hw, hw, resolution)
    X, Y = np.meshgrid(xs, ys)
    X, Y = X.ravel(), Y.ravel()
    best = np.hypot(X - center.x, Y - center.y) / eps
    g = build_graph(s, center, None, eps)
    if len(s):
        d, _ = kernels.dijkstra_csr(g.indptr, g.head, g.weight, g.source)
        on = g.road >= 0
        pairs = {(int(r), int(n)) for r, n in zip(g.road[on], g.tail[on])}
        # a centre on a road is that road's only node when nothing crosses it
        pairs |= {(r.id, g.source) for r in s.roads
                  if r.v > eps and r.line.distance(center) < 1e-9}
        by_road: dict = {}
        for r, n in pairs:
            by_road.setdefault(r, []).append(n)
        for r, nodes in sorted(by_road.items()):
            road = s.by_id[r]
            nodes = np.array(sorted(nodes))
            nodes = nodes[np.isfinite(d[nodes])]
            if not len(nodes):
                continue
            th, w, v = road.line.theta, road.line.w, road.v
            co, si = math.cos(th), math.sin(th)
            tn = co * g.pos[nodes, 0] + si * g.pos[nodes, 1]
            tz = co * X + si * Y
            hz = np.abs(-si * X + co * Y - w)
            step = max(1, chunk // len(nodes))
            for a in range(0, len(X), step):
                sl = slice(a, a + step)
                dd = np.abs(tz[sl][None, :] - tn[:, None])
                cost = d[nodes][:, None] + _exit_times(dd, hz[sl][None, :], v, eps)
                np.minimum(best[sl], cost.min(axis=0), out=best[sl])
    return BallRaster(center, float(eps), xs, ys, best.reshape(resolution, resolution),
                      tuple(float(r) for r in radii))
