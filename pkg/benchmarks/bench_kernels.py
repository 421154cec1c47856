"""Compiled vs pure-Python kernels on the two hot loops.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints one line per (kernel, backend) with the best wall time and checks
that both backends return identical arrays.
"""

import argparse
import time

import numpy as np

from roadmetric import kernels
from roadmetric.eps_graph import build_graph
from roadmetric.oracle import lattice_speeds
from roadmetric.sampler import sample_scene


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--grid", type=int, default=257, help="lattice side (nodes)")
    args = ap.parse_args()
    backends = ["python"]
    try:
        kernels._select("cython")
        backends.insert(0, "cython")
    except ImportError:
        print("compiled extension not built; timing the fallback only")

    s = sample_scene((0.0, 0.0), 2.0, 0.1, 3.0, 1)
    g = build_graph(s, (-1.0, 0.2), (1.0, -0.3), 0.1)
    print(f"graph: {g.n_nodes} nodes, {g.n_edges} edges")
    results = {}
    for b in backends:
        t, out = best_of(lambda: kernels.dijkstra_csr(g.indptr, g.head, g.weight, g.source,
                                                      backend=b), args.repeat)
        results[("dijkstra", b)] = out
        print(f"dijkstra_csr  {b:7s} {t * 1e3:9.2f} ms")

    step = 4.0 / (args.grid - 1)
    slow = 1.0 / lattice_speeds(s, (-2.0, -2.0), 4.0, step, 0.1)
    src = (args.grid // 2, args.grid // 2)
    for b in backends:
        t, out = best_of(lambda: kernels.lattice_dijkstra(slow, step, src, backend=b), args.repeat)
        results[("lattice", b)] = out
        print(f"lattice       {b:7s} {t * 1e3:9.2f} ms  ({args.grid}x{args.grid})")

    if len(backends) == 2:
        same_d = all(np.array_equal(x, y) for x, y in zip(results[("dijkstra", "cython")],
                                                          results[("dijkstra", "python")]))
        same_l = np.array_equal(results[("lattice", "cython")], results[("lattice", "python")])
        print(f"identical outputs: dijkstra={same_d} lattice={same_l}")


if __name__ == "__main__":
    main()
