# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled shortest-path kernels; mirrors ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY
from libcpp.queue cimport priority_queue
from libcpp.pair cimport pair

cnp.import_array()

ctypedef pair[double, long] entry


cdef inline long _edge_tail(const long[::1] indptr, long e) nogil:
    cdef long lo = 0, hi = indptr.shape[0] - 1, mid
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if indptr[mid] <= e:
            lo = mid
        else:
            hi = mid
    return lo


def dijkstra_csr(const long[::1] indptr, const long[::1] indices,
                 const double[::1] weights, long source, long target=-1):
    cdef long n = indptr.shape[0] - 1
    dist_arr = np.full(n, np.inf)
    pred_arr = np.full(n, -1, dtype=np.int64)
    cdef double[::1] dist = dist_arr
    cdef long[::1] pred = pred_arr
    cdef char[::1] done = np.zeros(n, dtype=np.int8)
    cdef priority_queue[entry] heap
    cdef long u, v, e, pu
    cdef double d, nd, w
    dist[source] = 0.0
    heap.push(entry(-0.0, -source))
    while not heap.empty():
        d = -heap.top().first
        u = -heap.top().second
        heap.pop()
        if done[u]:
            continue
        done[u] = 1
        if u == target:
            break
        for e in range(indptr[u], indptr[u + 1]):
            w = weights[e]
            if w == INFINITY:
                continue
            v = indices[e]
            if done[v]:
                continue
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = e
                heap.push(entry(-nd, -v))
            elif nd == dist[v] and pred[v] >= 0:
                # equal time: keep the lower-id predecessor node
                pu = _edge_tail(indptr, pred[v])
                if u < pu:
                    pred[v] = e
    return dist_arr, pred_arr


def lattice_dijkstra(const double[:, ::1] slowness, double step, long si, long sj,
                     const long[:, ::1] stencil):
    """Travel times over a grid where each move costs
    ``length * (slowness[a] + slowness[b]) / 2``."""
    cdef long nx = slowness.shape[0], ny = slowness.shape[1]
    cdef long ns = stencil.shape[0]
    out = np.full((nx, ny), np.inf)
    cdef double[:, ::1] t = out
    cdef char[:, ::1] done = np.zeros((nx, ny), dtype=np.int8)
    cdef double[::1] slen = np.empty(ns)
    cdef priority_queue[entry] heap
    cdef long k, i, j, a, b, idx
    cdef double d, nd
    for k in range(ns):
        slen[k] = step * sqrt(<double>(stencil[k, 0] * stencil[k, 0] + stencil[k, 1] * stencil[k, 1]))
    t[si, sj] = 0.0
    heap.push(entry(-0.0, -(si * ny + sj)))
    while not heap.empty():
        d = -heap.top().first
        idx = -heap.top().second
        heap.pop()
        i = idx // ny
        j = idx % ny
        if done[i, j]:
            continue
        done[i, j] = 1
        for k in range(ns):
            a = i + stencil[k, 0]
            b = j + stencil[k, 1]
            if a < 0 or a >= nx or b < 0 or b >= ny or done[a, b]:
                continue
            nd = d + slen[k] * 0.5 * (slowness[i, j] + slowness[a, b])
            if nd < t[a, b]:
                t[a, b] = nd
                heap.push(entry(-nd, -(a * ny + b)))
    return out
