import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from roadmetric import kernels

BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])


@st.composite
def random_graphs(draw):
    n = draw(st.integers(1, 25))
    m = draw(st.integers(0, 80))
    tails = draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m))
    heads = draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m))
    ws = draw(st.lists(st.floats(0.01, 10.0), min_size=m, max_size=m))
    edges = sorted({(t, h): w for t, h, w in zip(tails, heads, ws) if t != h}.items())
    tail = np.array([e[0][0] for e in edges], dtype=np.int64)
    head = np.array([e[0][1] for e in edges], dtype=np.int64)
    w = np.array([e[1] for e in edges], dtype=float)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, tail + 1, 1)
    return n, np.cumsum(indptr), tail, head, w


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=80, deadline=None)
@given(g=random_graphs())
def test_dijkstra_matches_scipy(backend, g):
    n, indptr, tail, head, w = g
    d, pred = kernels.dijkstra_csr(indptr, head, w, 0, backend=backend)
    ref = dijkstra(csr_matrix((w, head, indptr), shape=(n, n)), indices=0)
    fin = np.isfinite(ref)
    assert np.array_equal(np.isfinite(d), fin)
    assert np.allclose(d[fin], ref[fin], rtol=1e-12)
    # predecessor edges reproduce the distances
    for v in np.flatnonzero(fin):
        if v == 0:
            assert pred[v] == -1
            continue
        e = pred[v]
        assert head[e] == v
        assert d[v] == pytest.approx(d[tail[e]] + w[e], rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(g=random_graphs())
def test_backends_identical(g):
    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    n, indptr, tail, head, w = g
    a = kernels.dijkstra_csr(indptr, head, w, 0, backend="python")
    b = kernels.dijkstra_csr(indptr, head, w, 0, backend="cython")
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])


@pytest.mark.parametrize("backend", BACKENDS)
def test_infinite_weights_ignored(backend):
    indptr = np.array([0, 2, 3, 3])
    head = np.array([1, 2, 2])
    w = np.array([1.0, math.inf, 1.0])
    d, pred = kernels.dijkstra_csr(indptr, head, w, 0, backend=backend)
    assert d.tolist() == [0.0, 1.0, 2.0]
    assert pred.tolist() == [-1, 0, 2]


@pytest.mark.parametrize("backend", BACKENDS)
def test_tie_break_lowest_tail(backend):
    # 0->1->3 and 0->2->3 both cost 2; the predecessor of 3 comes from node 1
    indptr = np.array([0, 2, 3, 4, 4])
    head = np.array([1, 2, 3, 3])
    w = np.array([1.0, 1.0, 1.0, 1.0])
    _, pred = kernels.dijkstra_csr(indptr, head, w, 0, backend=backend)
    assert pred[3] == 2  # edge index of 1->3


@pytest.mark.parametrize("backend", BACKENDS)
def test_lattice_uniform_speed(backend):
    n, step = 33, 1.0 / 16
    t = kernels.lattice_dijkstra(np.ones((n, n)), step, (16, 16), backend=backend)
    assert t[16, 16] == 0.0
    # axis and diagonal moves are exact
    assert t[32, 16] == pytest.approx(1.0, rel=1e-12)
    assert t[32, 32] == pytest.approx(math.sqrt(2.0), rel=1e-12)
    # knight-move directions are exact too
    assert t[32, 24] == pytest.approx(math.hypot(1.0, 0.5), rel=1e-12)
    # worst stencil direction error stays below 3%
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    r = step * np.hypot(ii - 16, jj - 16)
    mask = r > 0
    assert np.max(t[mask] / r[mask]) < 1.03
    assert np.min(t[mask] / r[mask]) >= 1.0 - 1e-12


def test_lattice_backends_identical():
    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(0)
    slow = rng.uniform(0.2, 3.0, size=(40, 30))
    a = kernels.lattice_dijkstra(slow, 0.1, (3, 7), backend="python")
    b = kernels.lattice_dijkstra(slow, 0.1, (3, 7), backend="cython")
    assert np.array_equal(a, b)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.dijkstra_csr(np.array([0, 0]), np.array([], dtype=np.int64), np.array([]), 0,
                             backend="fortran")
