import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roadmetric.eps_graph import (
    KIND_INTERSECTION,
    KIND_REFRACTION,
    KIND_TERMINAL,
    OFF_ROAD,
    build_graph,
    build_graph_full,
    containment_certificate,
    degenerate_pairs,
    double_refraction_margin,
    relevant_roads,
)
from roadmetric.geometry import Line, refraction_points
from roadmetric.sampler import make_scene, sample_scene
from roadmetric.solver import shortest_path


def edge_set(g):
    return {(g.keys[e.tail], g.keys[e.head], e.road) for e in g.edges}


def test_empty_scene_graph():
    g = build_graph(make_scene([]), (0, 0), (3, 4), 0.5)
    assert g.n_nodes == 2
    assert g.n_edges == 1
    e = g.edges[0]
    assert e.road == OFF_ROAD and e.weight == 10.0


def test_one_road_graph():
    s = make_scene([(Line(0.0, 0.0), 2.0)])
    g = build_graph(s, (0, 1), (3, -2), 1.0)
    kinds = [nd.kind for nd in g.nodes]
    assert kinds.count(KIND_TERMINAL) == 2
    assert kinds.count(KIND_REFRACTION) == 4
    assert g.n_nodes == 6
    # the refraction nodes are the geometric refraction points of each terminal
    got = sorted((round(nd.position.x, 12), round(nd.position.y, 12)) for nd in g.nodes
                 if nd.kind == KIND_REFRACTION)
    want = sorted((round(p.x, 12), round(p.y, 12)) for x in [(0, 1), (3, -2)]
                  for p in refraction_points(x, Line(0.0, 0.0), 2.0, 1.0))
    assert got == want
    road = [e for e in g.edges if e.road != OFF_ROAD]
    assert len(road) == 6  # a chain of 4 nodes, both directions
    assert all(e.weight == pytest.approx(e.length / 2.0) for e in road)


def test_slow_roads_ignored():
    s = make_scene([(Line(0.0, 0.0), 1.0), (Line(1.0, 0.2), 0.5)])
    g = build_graph(s, (0, 1), (3, -2), 1.0)
    assert g.n_nodes == 2


def test_two_roads_one_intersection():
    s = make_scene([(Line(0.0, 0.0), 2.0), (Line(math.pi / 2, 0.0), 3.0)])
    g = build_graph(s, (1, 1), (-2, 3), 1.0)
    inter = [nd for nd in g.nodes if nd.kind == KIND_INTERSECTION]
    assert len(inter) == 1
    assert inter[0].position.x == pytest.approx(0.0, abs=1e-15)
    assert inter[0].position.y == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_node_and_edge_counts(seed):
    s = sample_scene((0, 0), 1.0, 0.4, 3.0, seed)
    eps = 0.4
    m = len(s)
    g = build_graph(s, (0.13, 0.71), (-0.52, -0.33), eps)
    n = 2 + 4 * m + m * (m - 1) // 2
    assert g.n_nodes == n
    # each road carries m-1 crossings and 4 refraction nodes
    assert sum(1 for e in g.edges if e.road != OFF_ROAD) == 2 * m * (m + 2)
    assert sum(1 for e in g.edges if e.road == OFF_ROAD) == (n - 1) + (n - 2)


def test_terminal_on_road_snaps():
    s = make_scene([(Line(0.0, 0.0), 2.0)])
    g = build_graph(s, (0.5, 0.0), (3, -2), 1.0)
    # no refraction nodes for the on-road source
    assert sum(1 for nd in g.nodes if nd.kind == KIND_REFRACTION) == 2
    assert any(e.tail == g.source and e.road != OFF_ROAD for e in g.edges)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_road_edges_on_their_roads(seed):
    s = sample_scene((0, 0), 1.0, 0.5, 3.0, seed)
    g = build_graph(s, (0.2, 0.1), (-0.4, 0.3), 0.5)
    for e in g.edges:
        if e.road == OFF_ROAD:
            continue
        line = s.by_id[e.road].line
        assert line.distance(g.pos[e.tail]) < 1e-9
        assert line.distance(g.pos[e.head]) < 1e-9
        assert e.length == pytest.approx(math.dist(g.pos[e.tail], g.pos[e.head]))


def test_margin_one_road_is_infinite():
    assert double_refraction_margin(make_scene([(Line(0.3, 0.0), 2.0)]), 1.0) == math.inf


def test_margin_perpendicular():
    s = make_scene([(Line(0.0, 0.0), 2.0), (Line(math.pi / 2, 0.5), 2.0)])
    # |e|^2 = 2 (eps/v)^2 = 0.5
    assert double_refraction_margin(s, 1.0) == pytest.approx(0.5, abs=1e-15)
    # generic linear solver agrees
    A = np.array([[1.0, 0.0], [0.0, 1.0]])
    e = np.linalg.solve(A, [0.5, 0.5])
    assert abs(e @ e - 1.0) == pytest.approx(0.5)


def test_margin_constructed_degenerate_pair():
    # both roads see the unit direction e = (1, 0) at their refraction angle
    eps = 0.3
    a1, a2 = math.pi / 3, 3 * math.pi / 4
    v1, v2 = eps / abs(math.cos(a1)), eps / abs(math.cos(a2))
    s = make_scene([(Line(a1, 0.0), v1), (Line(a2, 0.4), v2)])
    assert double_refraction_margin(s, eps) < 1e-12
    assert degenerate_pairs(s, eps, 1e-6) == [(0, 1)]
    assert degenerate_pairs(s, eps * 0.5, 1e-6) == []


def test_containment_examples():
    empty = make_scene([], R=10.0)
    c = containment_certificate(empty, (0, 0), (0, 0), 0.0, eps=1.0)
    assert c.containment_ok
    c = containment_certificate(empty, (0, 0), (1, 0), 1.0, eps=1.0)
    assert c.containment_ok and c.containment_radius == 0.5
    fast = make_scene([(Line(0.0, 0.0), 30.0)], R=10.0)
    c = containment_certificate(fast, (0, 0), (1, 0), 1.0, eps=1.0)
    assert not c.containment_ok


def test_full_mode_empty_scene_matches_exact():
    a = build_graph(make_scene([]), (0, 0), (1, 1), 1.0)
    b = build_graph_full(make_scene([]), (0, 0), (1, 1), 1.0)
    assert edge_set(a) == edge_set(b) and a.n_nodes == b.n_nodes


@pytest.mark.parametrize("seed", range(6))
def test_full_mode_superset_and_same_value(seed):
    s = sample_scene((0, 0), 1.0, 0.6, 3.0, seed)
    x, y = (0.3, -0.4), (-0.5, 0.6)
    eps = 0.6
    a = build_graph(s, x, y, eps)
    b = build_graph_full(s, x, y, eps)
    assert edge_set(a) <= edge_set(b)
    assert b.n_exact_nodes == a.n_nodes
    if double_refraction_margin(s, eps) > 1e-6:
        assert shortest_path(b).total_time == pytest.approx(shortest_path(a).total_time, abs=1e-9)


def test_full_mode_restricted_pairs():
    s = sample_scene((0, 0), 1.0, 0.4, 3.0, 3)
    assert len(s) >= 3
    x, y = (0.3, -0.4), (-0.5, 0.6)
    exact = build_graph(s, x, y, 0.5)
    none = build_graph_full(s, x, y, 0.5, pairs=[])
    assert edge_set(none) == edge_set(exact)
    i, j = s.roads[0].id, s.roads[1].id
    some = build_graph_full(s, x, y, 0.5, pairs=[(i, j)])
    assert edge_set(exact) < edge_set(some)


def test_relevant_roads_keeps_answer():
    for seed in range(10):
        s = sample_scene((0, 0), 2.0, 0.3, 3.0, seed)
        x, y = (0.1, 0.2), (0.7, -0.5)
        sub = relevant_roads(s, x, y, 0.3)
        assert len(sub) <= len(s)
        full = shortest_path(build_graph(s, x, y, 0.3)).total_time
        pruned = shortest_path(build_graph(sub, x, y, 0.3)).total_time
        assert pruned == pytest.approx(full, abs=1e-12)


def test_dump_format():
    s = make_scene([(Line(0.0, 0.0), 2.0)])
    text = build_graph(s, (0, 1), (3, -2), 1.0).dump()
    rows = text.splitlines()
    assert sum(r.startswith("node ") for r in rows) == 6
    assert all(r.split()[0] in ("node", "edge") for r in rows)
    assert any(r.startswith("edge") and "road:0" in r for r in rows)


def test_bad_eps():
    with pytest.raises(ValueError):
        build_graph(make_scene([]), (0, 0), (1, 0), 0.0)
