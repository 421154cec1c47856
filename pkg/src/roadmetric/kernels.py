"""Kernel selection: compiled extension when importable, else pure Python.

Set ``ROADMETRIC_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if not os.environ.get("ROADMETRIC_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py

# 8-neighbour moves plus the 8 knight moves
STENCIL16 = np.array(
    [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1),
     (2, 1), (2, -1), (-2, 1), (-2, -1), (1, 2), (1, -2), (-1, 2), (-1, -2)],
    dtype=np.int64,
)


def dijkstra_csr(indptr, indices, weights, source, target=-1, backend=None):
    """Single-source Dijkstra over a CSR graph.

    Returns ``(dist, pred_edge)``; ``pred_edge[v]`` is the CSR index of the
    edge used to reach ``v`` (``-1`` for the source and unreached nodes).
    Equal-time predecessors resolve to the lowest tail node id.  Edges with
    infinite weight are ignored.
    """
    impl = _select(backend)
    return impl.dijkstra_csr(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.float64),
        int(source),
        int(target),
    )


def lattice_dijkstra(slowness, step, source, stencil=STENCIL16, backend=None):
    impl = _select(backend)
    return impl.lattice_dijkstra(
        np.ascontiguousarray(slowness, dtype=np.float64),
        float(step),
        int(source[0]),
        int(source[1]),
        np.ascontiguousarray(stencil, dtype=np.int64),
    )


def _select(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {backend!r}")
