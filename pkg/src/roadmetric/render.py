"""Deterministic SVG drawings of scenes, geodesics and balls."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import contourpy
import numpy as np

from .sampler import Scene

SIZE = 800


@dataclass
class SvgScene:
    scene: Scene
    paths: list = field(default_factory=list)  # lists of points
    points: list = field(default_factory=list)
    ball: object = None  # BallRaster
    title: str = ""


def _num(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _clip_line(theta: float, w: float, box):
    """Chord of a line through an axis-aligned box, or None."""
    x0, y0, x1, y1 = box
    c, s = math.cos(theta), math.sin(theta)
    px, py = -w * s, w * c
    lo, hi = -math.inf, math.inf
    for d, p, a, b in ((c, px, x0, x1), (s, py, y0, y1)):
        if abs(d) < 1e-15:
            if p < a or p > b:
                return None
            continue
        t1, t2 = (a - p) / d, (b - p) / d
        lo, hi = max(lo, min(t1, t2)), min(hi, max(t1, t2))
    if lo >= hi:
        return None
    return (px + lo * c, py + lo * s), (px + hi * c, py + hi * s)


def _lerp_color(c0, c1, f: float) -> str:
    f = min(1.0, max(0.0, f))
    r, g, b = (round(a + f * (b_ - a)) for a, b_ in zip(c0, c1))
    return f"#{r:02x}{g:02x}{b:02x}"


BLUE = (40, 70, 200)
RED = (210, 40, 40)
GREY = (200, 200, 200)
DARK = (20, 20, 20)


def render_svg(img: SvgScene) -> str:
    s = img.scene
    box = (s.center.x - s.R, s.center.y - s.R, s.center.x + s.R, s.center.y + s.R)
    k = SIZE / (2.0 * s.R)

    def px(p):
        return _num((p[0] - box[0]) * k), _num((box[3] - p[1]) * k)

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" '
           f'height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">']
    if img.title:
        out.append(f"<title>{escape(img.title)}</title>")
    out.append(f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>')

    ball = img.ball
    if ball is not None and ball.radii:
        out.append('<g id="balls" stroke="none">')
        gen = contourpy.contour_generator(ball.xs, ball.ys, ball.times, fill_type="OuterOffset")
        levels = sorted(ball.radii)
        for i, t in enumerate(reversed(levels)):
            colour = _lerp_color(BLUE, RED, 1.0 - i / max(1, len(levels) - 1))
            polys, offsets = gen.filled(-math.inf, t)
            d = []
            for pts, offs in zip(polys, offsets):
                for a, b in zip(offs[:-1], offs[1:]):
                    ring = pts[a:b]
                    d.append("M" + " L".join(",".join(px(q)) for q in ring) + " Z")
            if d:
                out.append(f'<path fill="{colour}" fill-opacity="0.35" fill-rule="evenodd" '
                           f'd="{" ".join(d)}"/>')
        out.append("</g>")

    out.append('<g id="roads" stroke-linecap="butt">')
    if s.roads:
        lv = np.log(s.v)
        lo, hi = float(lv.min()), float(lv.max())
        span = hi - lo if hi > lo else 1.0
        for r in sorted(s.roads, key=lambda r: (r.v, r.id)):
            seg = _clip_line(r.line.theta, r.line.w, box)
            if seg is None:
                continue
            f = (math.log(r.v) - lo) / span
            (x1, y1), (x2, y2) = px(seg[0]), px(seg[1])
            out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                       f'stroke="{_lerp_color(GREY, DARK, f)}" stroke-width="{_num(0.5 + 3.0 * f)}"/>')
    out.append("</g>")

    out.append('<g id="paths" fill="none" stroke="#e07000" stroke-width="3" stroke-linejoin="round">')
    for pts in img.paths:
        if len(pts) >= 2:
            out.append(f'<polyline points="{" ".join(",".join(px(q)) for q in pts)}"/>')
    out.append("</g>")

    out.append('<g id="points" fill="#000000">')
    for q in img.points:
        x, y = px(q)
        out.append(f'<circle cx="{x}" cy="{y}" r="4"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(img: SvgScene, path) -> None:
    Path(path).write_text(render_svg(img))
