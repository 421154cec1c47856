"""Pure-Python versions of the shortest-path kernels.

Used when the compiled extension is missing or ``ROADMETRIC_PURE_PYTHON`` is
set.  Results are identical to the compiled kernels, including tie-breaking.
"""

import heapq
import math
from bisect import bisect_right

import numpy as np


def dijkstra_csr(indptr, indices, weights, source, target=-1):
    n = len(indptr) - 1
    indptr = indptr.tolist() if hasattr(indptr, "tolist") else list(indptr)
    indices = indices.tolist() if hasattr(indices, "tolist") else list(indices)
    weights = weights.tolist() if hasattr(weights, "tolist") else list(weights)
    dist = [math.inf] * n
    pred = [-1] * n
    done = [False] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == target:
            break
        for e in range(indptr[u], indptr[u + 1]):
            w = weights[e]
            if w == math.inf:
                continue
            v = indices[e]
            if done[v]:
                continue
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = e
                heapq.heappush(heap, (nd, v))
            elif nd == dist[v] and pred[v] >= 0:
                if u < bisect_right(indptr, pred[v]) - 1:
                    pred[v] = e
    return np.array(dist), np.array(pred, dtype=np.int64)


def lattice_dijkstra(slowness, step, si, sj, stencil):
    nx, ny = slowness.shape
    slow = slowness.tolist()
    moves = [(int(a), int(b), step * math.hypot(a, b)) for a, b in stencil]
    t = [[math.inf] * ny for _ in range(nx)]
    done = [[False] * ny for _ in range(nx)]
    t[si][sj] = 0.0
    heap = [(0.0, si * ny + sj)]
    while heap:
        d, idx = heapq.heappop(heap)
        i, j = divmod(idx, ny)
        if done[i][j]:
            continue
        done[i][j] = True
        si_ = slow[i][j]
        for da, db, ln in moves:
            a, b = i + da, j + db
            if a < 0 or a >= nx or b < 0 or b >= ny or done[a][b]:
                continue
            nd = d + ln * 0.5 * (si_ + slow[a][b])
            if nd < t[a][b]:
                t[a][b] = nd
                heapq.heappush(heap, (nd, a * ny + b))
    return np.array(t)
