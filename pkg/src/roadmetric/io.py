"""Text formats: scene files, path records, JSON-lines reports, CSV tables."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .geometry import Line, Point
from .sampler import Road, Scene, make_scene
from .solver import ROAD, STRAIGHT, BracketResult, GeodesicPath, PathSegment

SCENE_MAGIC = "roadmetric-scene"
PATH_MAGIC = "roadmetric-path"


def _g(x: float) -> str:
    return f"{x:.17g}"


def _fields(tokens) -> dict:
    out = {}
    for tok in tokens:
        k, sep, v = tok.partition("=")
        if not sep:
            raise ValueError(f"malformed header field {tok!r}")
        out[k] = v
    return out


def scene_to_text(s: Scene) -> str:
    lines = [f"{SCENE_MAGIC} v1 beta={_g(s.beta)} R={_g(s.R)} cx={_g(s.center.x)} "
             f"cy={_g(s.center.y)} vmin={_g(s.v_min)} seed={s.seed}"]
    for r in sorted(s.roads, key=lambda r: r.id):
        lines.append(f"{r.id} {_g(r.line.theta)} {_g(r.line.w)} {_g(r.v)}")
    return "\n".join(lines) + "\n"


def scene_from_text(text: str) -> Scene:
    rows = [ln for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty scene file")
    head = rows[0].split()
    if head[:2] != [SCENE_MAGIC, "v1"]:
        raise ValueError("not a roadmetric scene file")
    h = _fields(head[2:])
    roads = []
    for ln in rows[1:]:
        parts = ln.split()
        if len(parts) != 4:
            raise ValueError(f"bad road record {ln!r}")
        roads.append(Road(int(parts[0]), Line(float(parts[1]), float(parts[2])), float(parts[3])))
    return make_scene(roads, (float(h["cx"]), float(h["cy"])), float(h["R"]),
                      float(h["vmin"]), float(h["beta"]), int(h["seed"]))


def write_scene(s: Scene, path) -> None:
    Path(path).write_text(scene_to_text(s))


def read_scene(path) -> Scene:
    return scene_from_text(Path(path).read_text())


def path_to_text(p: GeodesicPath, result: BracketResult | None = None) -> str:
    head = [f"{PATH_MAGIC} v1", f"total_time={_g(p.total_time)}"]
    if result is not None:
        c = result.certificate
        head += [f"eps={_g(result.eps)}", f"mode={result.mode}",
                 f"kendall_ub={_g(result.kendall_ub)}",
                 f"double_refraction_margin={_g(c.double_refraction_margin)}",
                 f"containment_ok={int(c.containment_ok)}",
                 f"containment_radius={_g(c.containment_radius)}"]
    lines = [" ".join(head)]
    for sg in p.segments:
        road = "-" if sg.road is None else str(sg.road)
        lines.append(f"{sg.mode} {road} {_g(sg.start.x)} {_g(sg.start.y)} "
                     f"{_g(sg.end.x)} {_g(sg.end.y)} {_g(sg.time)}")
    return "\n".join(lines) + "\n"


def path_from_text(text: str) -> tuple[GeodesicPath, dict]:
    """Parse a path record; returns the path and the header fields."""
    rows = [ln for ln in text.splitlines() if ln.strip()]
    head = rows[0].split()
    if head[:2] != [PATH_MAGIC, "v1"]:
        raise ValueError("not a roadmetric path record")
    h = _fields(head[2:])
    segs = []
    for ln in rows[1:]:
        mode, road, x1, y1, x2, y2, t = ln.split()
        if mode not in (ROAD, STRAIGHT):
            raise ValueError(f"bad segment mode {mode!r}")
        a, b = Point(float(x1), float(y1)), Point(float(x2), float(y2))
        ln_ = math.hypot(b.x - a.x, b.y - a.y)
        tt = float(t)
        segs.append(PathSegment(a, b, mode, None if road == "-" else int(road),
                                ln_ / tt if tt > 0 else math.inf, tt))
    return GeodesicPath(tuple(segs), float(h["total_time"])), h


def _json_safe(v):
    if isinstance(v, float):
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def dumps_record(rec: dict) -> str:
    """One JSON line; non-finite floats become ``"inf"``/``"-inf"``/null."""
    if "kind" not in rec:
        raise ValueError("record needs a 'kind' field")
    return json.dumps(_json_safe(rec), sort_keys=True, allow_nan=False)


def write_jsonl(records, path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(dumps_record(rec) + "\n")


def read_jsonl(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(ln) for ln in fh if ln.strip()]


def write_time_table(path, radii, samples) -> None:
    """CSV with columns ``radius,trial,time``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["radius", "trial", "time"])
        for r, xs in zip(radii, samples):
            for i, t in enumerate(xs):
                w.writerow([_g(r), i, _g(t)])
