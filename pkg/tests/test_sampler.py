import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from roadmetric.geometry import Line, Point
from roadmetric.io import scene_to_text
from roadmetric.sampler import (
    ScalingMap,
    intersections,
    make_scene,
    road_count,
    roads_hitting_ball,
    sample_scene,
    scale_scene,
    speed_at,
    speed_from_uniform,
)


def test_expected_counts_closed_form():
    # mean of the count is R * v_min^-(beta-1)
    for R, v0, expect in [(1.0, 1.0, 1.0), (1.0, 0.5, 4.0), (2.0, 1.0, 2.0)]:
        counts = np.array([road_count(R, v0, 3.0, seed) for seed in range(4000)])
        se = math.sqrt(expect / len(counts))
        assert abs(counts.mean() - expect) < 4 * se


def test_count_law_mean_and_variance():
    counts = np.array([road_count(1.0, 1.0, 3.0, seed) for seed in range(10_000)])
    assert abs(counts.mean() - 1.0) <= 0.03
    assert abs(counts.var() - 1.0) <= 0.05


def test_count_matches_scene_size():
    for seed in range(20):
        assert len(sample_scene((0, 0), 1.0, 0.5, 3.0, seed)) == road_count(1.0, 0.5, 3.0, seed)


def test_marginals_ks():
    thetas, offsets = [], []
    seed = 0
    while len(thetas) < 10_000:
        s = sample_scene((0.0, 0.0), 1.0, 0.3, 3.0, seed)
        thetas.extend(s.theta.tolist())
        offsets.extend(s.w.tolist())  # centre at the origin: w is the offset
        seed += 1
    n = len(thetas)
    crit = 1.628 / math.sqrt(n)
    assert stats.kstest(np.array(thetas) / math.pi, "uniform").statistic < crit
    assert stats.kstest((np.array(offsets) + 1.0) / 2.0, "uniform").statistic < crit


def test_speed_tail():
    v = np.concatenate([sample_scene((0, 0), 1.0, 0.1, 3.0, seed).v for seed in range(1000)])
    # P(v >= t) = (t / v_min)^-2
    for t in (0.2, 0.5, 1.0):
        expect = (t / 0.1) ** -2
        assert abs(np.mean(v >= t) - expect) < 4 * math.sqrt(expect * (1 - expect) / len(v))
    assert v.min() >= 0.1


def test_inverse_cdf_example():
    assert speed_from_uniform(0.25, 1.0, 3.0) == 2.0
    rng = np.random.default_rng(5)
    u = 1.0 - rng.random(100_000)
    v = speed_from_uniform(u, 1.0, 3.0)
    # empirical median of the tail law sits at sqrt(2)
    assert abs(np.median(v) - math.sqrt(2.0)) < 0.02


def test_roads_hit_window():
    s = sample_scene((3.0, -1.0), 2.0, 0.2, 3.0, 11)
    assert len(s) > 10
    assert roads_hitting_ball(s, s.center, s.R).all()
    assert all(r.line.distance(s.center) <= s.R for r in s.roads)


def test_determinism():
    a = sample_scene((0.5, 0.25), 1.5, 0.2, 3.5, 42)
    b = sample_scene((0.5, 0.25), 1.5, 0.2, 3.5, 42)
    assert scene_to_text(a) == scene_to_text(b)
    c = sample_scene((0.5, 0.25), 1.5, 0.2, 3.5, 43)
    assert scene_to_text(a) != scene_to_text(c)


def test_substreams_independent_of_count():
    # road i depends only on (seed, i); a larger window keeps the same draws
    a = sample_scene((0, 0), 1.0, 0.3, 3.0, 9)
    b = sample_scene((0, 0), 1.0, 0.2, 3.0, 9)
    ta = {r.id: r.line.theta for r in a.roads}
    tb = {r.id: r.line.theta for r in b.roads}
    for i in set(ta) & set(tb):
        assert ta[i] == tb[i]


def test_sample_rejects_bad_parameters():
    with pytest.raises(ValueError):
        sample_scene((0, 0), 0.0, 1.0, 3.0, 0)
    with pytest.raises(ValueError):
        sample_scene((0, 0), 1.0, 0.0, 3.0, 0)
    with pytest.raises(ValueError):
        sample_scene((0, 0), 1.0, 1.0, 2.0, 0)
    with pytest.raises(ValueError):
        ScalingMap(Point(0, 0), 0.0)


def test_scale_identity():
    s = sample_scene((0, 0), 1.0, 0.3, 3.0, 3)
    t = scale_scene(s, ScalingMap(Point(0.0, 0.0), 1.0))
    assert scene_to_text(t) == scene_to_text(s)


def test_scale_speeds_double_at_r4():
    s = sample_scene((0, 0), 1.0, 0.3, 3.0, 3)
    t = scale_scene(s, ScalingMap(Point(1.0, 2.0), 4.0))
    assert np.allclose(t.v, 2.0 * s.v, rtol=1e-15)
    assert t.v_min == pytest.approx(0.6) and t.R == 4.0
    assert t.center == Point(1.0, 2.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 10.0), st.integers(0, 1000))
def test_scale_group_law(ax, ay, r, seed):
    s = sample_scene((0, 0), 1.0, 0.5, 3.0, seed)
    m = ScalingMap(Point(ax, ay), r)
    back = ScalingMap(Point(-ax / r, -ay / r), 1.0 / r)
    t = scale_scene(scale_scene(s, m), back)
    for a, b in zip(s.roads, t.roads):
        assert abs(a.line.w - b.line.w) < 1e-12 * max(1.0, r)
        assert a.line.theta == b.line.theta
        assert b.v == pytest.approx(a.v, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 10.0), st.floats(-2, 2))
def test_scaled_lines_contain_scaled_points(ax, ay, r, px):
    # the image of a point on a road lies on the image road
    line = Line(0.7, 0.3)
    p = line.point_at(px)
    sc = make_scene([(line, 2.0)])
    m = ScalingMap(Point(ax, ay), r)
    img = scale_scene(sc, m)
    assert img.roads[0].line.distance(m.point(p)) < 1e-9 * (1 + r)


def test_speed_at_examples():
    assert speed_at(make_scene([]), (0, 0)) == 0.0
    one = make_scene([(Line(0.0, 0.0), 5.0)])
    assert speed_at(one, (3.0, 0.0)) == 5.0
    assert speed_at(one, (3.0, 0.1)) == 0.0
    assert speed_at(one, (3.0, 0.1), tol=0.2) == 5.0
    two = make_scene([(Line(0.0, 0.0), 2.0), (Line(math.pi / 2, 0.0), 7.0)])
    assert speed_at(two, (0.0, 0.0)) == 7.0
    with pytest.raises(ValueError):
        speed_at(one, (0, 0), tol=-1.0)


def test_intersections_small():
    assert intersections(make_scene([(Line(0.0, 0.0), 1.0)])) == []
    two = make_scene([(Line(0.0, 1.0), 1.0), (Line(math.pi / 2, 0.0), 3.0)])
    pts = intersections(two)
    assert len(pts) == 1
    p, i, j = pts[0]
    assert (i, j) == (0, 1)
    assert p.x == pytest.approx(0.0, abs=1e-15) and p.y == pytest.approx(1.0)


def test_intersections_general_position():
    s = sample_scene((0, 0), 1.0, 0.3, 3.0, 17)
    n = len(s)
    pts = intersections(s)
    assert len(pts) == n * (n - 1) // 2
    # brute force: every point lies on both of its roads
    for p, i, j in pts:
        assert s.by_id[i].line.distance(p) < 1e-9
        assert s.by_id[j].line.distance(p) < 1e-9
    assert [(i, j) for _, i, j in pts] == sorted((i, j) for _, i, j in pts)


def test_no_triple_points():
    s = sample_scene((0, 0), 1.0, 0.25, 3.0, 23)
    pts = intersections(s)
    for p, i, j in pts:
        on = [r.id for r in s.roads if r.line.distance(p) < 1e-9]
        assert sorted(on) == sorted([i, j])
