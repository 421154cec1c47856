"""``roadmetric`` command line.

Exit codes: 0 success, 1 invalid input, 2 failed check.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import analysis, io, render
from .geometry import arc_polyline
from .sampler import intersections, sample_scene
from .solver import eps_sweep, t_eps


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _point(text: str):
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}") from None
    return (x, y)


def _floats(text: str):
    try:
        return [float(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", type=float, default=3.0)
    p.add_argument("--radius", type=float, default=1.0, help="window radius R")
    p.add_argument("--vmin", type=float, default=0.1, help="speed cutoff")
    p.add_argument("--eps", type=float, default=0.1, help="off-road speed")
    p.add_argument("--center", type=_point, default=(0.0, 0.0))
    p.add_argument("--scene", help="scene file (otherwise sampled from the flags above)")
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="roadmetric", description="Poisson roads random metric toolkit")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="sample a scene and write it")
    _common(p)

    p = sub.add_parser("geodesic", help="relaxed geodesic between two points")
    _common(p)
    p.add_argument("--from", dest="src", type=_point, required=True)
    p.add_argument("--to", dest="dst", type=_point, required=True)
    p.add_argument("--kendall", action="store_true", help="also compute Kendall's upper bound")

    p = sub.add_parser("sweep", help="eps sweep with Kendall brackets")
    _common(p)
    p.add_argument("--from", dest="src", type=_point, required=True)
    p.add_argument("--to", dest="dst", type=_point, required=True)
    p.add_argument("--eps-list", type=_floats, required=True)

    p = sub.add_parser("ball", help="travel-time raster around a point")
    _common(p)
    p.add_argument("--at", type=_point, default=(0.0, 0.0))
    p.add_argument("--radii", type=_floats, default=[])
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--svg", help="also render the balls to this SVG file")

    p = sub.add_parser("hubs", help="drive-through test at road crossings")
    _common(p)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--limit", type=int, default=100)

    p = sub.add_parser("confluence", help="geodesic tree from sources on a circle")
    _common(p)
    p.add_argument("--target", type=_point, default=(0.0, 0.0))
    p.add_argument("--sources", type=int, default=16)
    p.add_argument("--ring", type=float, default=0.5)

    p = sub.add_parser("cutlocus", help="grid scan for multiple geodesics")
    _common(p)
    p.add_argument("--origin", type=_point, default=(0.0, 0.0))
    p.add_argument("--spacing", type=float, default=0.1)
    p.add_argument("--extent", type=float, default=0.5)
    p.add_argument("--slack", type=float, default=None)
    p.add_argument("--box-sizes", type=_floats, default=[])

    p = sub.add_parser("stars", help="count disjoint geodesic arms at a point")
    _common(p)
    p.add_argument("--point", type=_point, required=True)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--probes", type=int, default=24)

    p = sub.add_parser("scaling", help="growth exponent of relaxed times")
    _common(p)
    p.add_argument("--radii", type=_floats, default=[1.0, 4.0, 16.0])
    p.add_argument("--trials", type=int, default=300)
    p.add_argument("--eps0", type=float, default=0.1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", help="write the time samples to this CSV file")

    p = sub.add_parser("check", help="statistical suites (exit 2 on failure)")
    _common(p)
    p.add_argument("suite", choices=["poisson", "scaling", "hubs", "arcs"])
    p.add_argument("--trials", type=int, default=10_000)

    p = sub.add_parser("render", help="SVG of a scene with optional overlays")
    _common(p)
    p.add_argument("--target", type=_point, default=None, help="draw geodesics to this point")
    p.add_argument("--sources", type=int, default=8)
    p.add_argument("--ring", type=float, default=0.5)
    p.add_argument("--ball", type=_point, default=None, help="draw balls around this point")
    p.add_argument("--radii", type=_floats, default=[])
    p.add_argument("--resolution", type=int, default=64)
    return ap


def _validate(a):
    if a.radius <= 0:
        raise ValueError("--radius must be positive")
    if a.vmin <= 0:
        raise ValueError("--vmin must be positive")
    if a.beta <= 2:
        raise ValueError("--beta must exceed 2")
    if a.eps <= 0:
        raise ValueError("--eps must be positive")
    for name in ("delta", "spacing", "extent", "ring"):
        if getattr(a, name, 1.0) is not None and getattr(a, name, 1.0) <= 0:
            raise ValueError(f"--{name} must be positive")
    if getattr(a, "resolution", 32) < 32:
        raise ValueError("--resolution must be at least 32")
    if getattr(a, "sources", 1) < 1:
        raise ValueError("--sources must be at least 1")


def _scene(a):
    if a.scene:
        return io.read_scene(a.scene)
    return sample_scene(a.center, a.radius, a.vmin, a.beta, a.seed)


def _ring(center, radius, n):
    return [(center[0] + radius * math.cos(2 * math.pi * k / n),
             center[1] + radius * math.sin(2 * math.pi * k / n)) for k in range(n)]


class _Out:
    def __init__(self, path):
        self.fh = open(path, "w") if path else sys.stdout

    def write(self, text):
        self.fh.write(text)

    def record(self, rec):
        self.fh.write(io.dumps_record(rec) + "\n")

    def close(self):
        if self.fh is not sys.stdout:
            self.fh.close()


def _run(a, out: _Out) -> int:
    cmd = a.command
    if cmd == "check":
        return _check(a, out)
    s = _scene(a)
    if cmd == "sample":
        out.write(io.scene_to_text(s))
        print(f"roads: {len(s)}", file=sys.stderr)
    elif cmd == "geodesic":
        r = t_eps(s, a.src, a.dst, a.eps, kendall=a.kendall)
        out.write(io.path_to_text(r.path, r))
    elif cmd == "sweep":
        for r in eps_sweep(s, a.src, a.dst, a.eps_list):
            rec = {"kind": "BracketResult", "eps": r.eps, "t_eps": r.t_eps,
                   "kendall_ub": r.kendall_ub, "mode": r.mode,
                   "double_refraction_margin": r.certificate.double_refraction_margin,
                   "containment_ok": r.certificate.containment_ok,
                   "containment_radius": r.certificate.containment_radius}
            out.record(rec)
    elif cmd == "ball":
        b = analysis.ball_raster(s, a.at, a.eps, a.radii, a.resolution)
        for t in b.radii:
            out.record({"kind": "BallLevel", "radius": t,
                        "cells": int(b.sublevel(t).sum()), "resolution": a.resolution})
        if a.svg:
            render.write_svg(render.SvgScene(s, ball=b, points=[a.at]), a.svg)
    elif cmd == "hubs":
        for p, i, j in intersections(s)[: a.limit]:
            out.record(analysis.to_record(analysis.hub_check(s, i, j, a.delta)))
    elif cmd == "confluence":
        c = analysis.confluence_tree(s, a.target, _ring(a.target, a.ring, a.sources), a.eps)
        rec = analysis.to_record(c)
        rec["audit"] = c.audit()
        out.record(rec)
    elif cmd == "cutlocus":
        c = analysis.cut_locus_scan(s, a.origin, a.spacing, a.extent, a.eps, a.slack)
        out.record(analysis.to_record(c))
        if a.box_sizes:
            pts = [h[0] for h in c.hits]
            out.record({"kind": "BoxCounts", "counts": analysis.box_counts(pts, a.box_sizes)})
    elif cmd == "stars":
        n = analysis.star_arms(s, a.point, a.eps, a.delta, a.probes)
        out.record({"kind": "StarArms", "point": list(a.point), "eps": a.eps,
                    "delta": a.delta, "arms": n})
    elif cmd == "scaling":
        rep = analysis.scaling_exponent(a.beta, a.radii, a.trials, a.eps0, a.seed,
                                        workers=a.workers)
        rec = analysis.to_record(rep)
        del rec["samples"]
        out.record(rec)
        if a.csv:
            io.write_time_table(a.csv, rep.radii, rep.samples)
    elif cmd == "render":
        img = render.SvgScene(s, title=f"seed {a.seed}")
        if a.target is not None:
            for src in _ring(a.target, a.ring, a.sources):
                img.paths.append(t_eps(s, src, a.target, a.eps).path.points)
                img.points.append(src)
            img.points.append(a.target)
        if a.ball is not None:
            img.ball = analysis.ball_raster(s, a.ball, a.eps, a.radii, a.resolution)
            img.points.append(a.ball)
        out.write(render.render_svg(img))
    return 0


def _check(a, out: _Out) -> int:
    ok = True
    if a.suite == "poisson":
        for R, v0 in ((1.0, 1.0), (2.0, 1.0), (1.0, 0.5)):
            r = analysis.poisson_law_check(R, v0, a.beta, a.trials, a.seed)
            out.record({"kind": "PoissonCheck", "R": R, "v0": v0, "beta": a.beta,
                        "mean": r.mean, "variance": r.variance, "expected": r.expected,
                        "pass": r.passed})
            ok &= r.passed
    elif a.suite == "scaling":
        rep = analysis.scaling_exponent(a.beta, [1.0, 4.0, 16.0], 300, 0.1, a.seed)
        lo, hi = rep.expected_slope - 0.05, rep.expected_slope + 0.05
        passed = lo <= rep.slope <= hi and rep.ks_statistic < rep.ks_critical
        out.record({"kind": "ScalingCheck", "slope": rep.slope, "ks": rep.ks_statistic,
                    "ks_critical": rep.ks_critical, "pass": passed})
        ok = passed
    elif a.suite == "hubs":
        s = _scene(a)
        reps = [analysis.hub_check(s, i, j, 0.01) for _, i, j in intersections(s)[:100]]
        used = [h for h in reps if h.applicable]
        passed = all(h.all_geodesic for h in used)
        out.record({"kind": "HubCheck", "cases": len(used), "pass": passed})
        ok = passed
    elif a.suite == "arcs":
        rng = np.random.default_rng(a.seed)
        bad = 0
        for _ in range(1000):
            x, y = rng.normal(size=2), rng.normal(size=2)
            x, y = x / np.linalg.norm(x), y / np.linalg.norm(y)
            rho = rng.uniform(0.05, 0.95)
            arc = arc_polyline(x, y, rho)
            vs = arc.vertices
            chord_ok = all(math.hypot(*(0.5 * (np.add(u, v)))) > rho for u, v in zip(vs, vs[1:]))
            bad += not (chord_ok and arc.total_length <= math.pi + 1e-9)
        out.record({"kind": "ArcCheck", "instances": 1000, "failures": bad, "pass": bad == 0})
        ok = bad == 0
    return 0 if ok else 2


def _config(a) -> dict:
    return {k: v for k, v in sorted(vars(a).items())}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
        _validate(a)
    except UsageError as e:
        print(f"roadmetric: error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"roadmetric: error: {e}", file=sys.stderr)
        return 1
    print("config: " + json.dumps(_config(a), sort_keys=True, default=list), file=sys.stderr)
    try:
        out = _Out(a.out)
    except OSError as e:
        print(f"roadmetric: error: {e}", file=sys.stderr)
        return 1
    try:
        return _run(a, out)
    except (ValueError, OSError, KeyError) as e:
        print(f"roadmetric: error: {e}", file=sys.stderr)
        return 1
    finally:
        out.close()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
