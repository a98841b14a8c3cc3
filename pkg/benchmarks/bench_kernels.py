"""Compare the compiled and numpy kernel backends on the pendulum at several grid sizes.

    python3 benchmarks/bench_kernels.py [--sizes 100 200 400] [--repeat 3]

Each kernel is timed on identical inputs for both backends and the outputs are
checked for exact equality.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from weakkam import _pykernels
from weakkam.critical import critical_value
from weakkam.model import HamiltonianModel
from weakkam.scheme import DiscreteScheme, build_graph

try:
    from weakkam import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _best(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _cases(graph, c, lam=0.025):
    m = graph.model
    shift = graph.tau * c
    red = graph.reduced_band(c)
    N = graph.N
    B1 = graph.lu0_bounds[0]
    tol = 1e-9 * graph.tau * lam * B1
    u0 = np.zeros(N)
    max_iter = int(60 / (graph.tau * lam * B1)) + 1000

    def fixed(k):
        return lambda: k.discounted_fixed_point(u0, lam, graph.tau, shift, graph.cost_band, graph.src_band,
                                                graph.node_a, m.g_kind, m.g_poly, tol, max_iter)[0]

    def karp(k):
        return lambda: np.array(k.karp_min_mean(graph.cost_band, graph.src_band))

    def apsp(k):
        return lambda: k.all_pairs_shortest(red, graph.src_band, N + 1)[0]

    return {"discounted_fixed_point": fixed, "karp_min_mean": karp, "all_pairs_shortest": apsp}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not available; timing the numpy backend only")
    print(f"{'kernel':<24} {'N':>5} {'numpy [s]':>11} {'cython [s]':>11} {'speedup':>8} {'equal':>6}")
    model = HamiltonianModel.pendulum()
    for N in args.sizes:
        graph = build_graph(model, DiscreteScheme(N))
        c = critical_value(graph)
        for name, make in _cases(graph, c).items():
            t_py, out_py = _best(make(_pykernels), args.repeat)
            if _ckernels is None:
                print(f"{name:<24} {N:>5} {t_py:>11.4f} {'-':>11} {'-':>8} {'-':>6}")
                continue
            t_c, out_c = _best(make(_ckernels), args.repeat)
            same = np.array_equal(out_py, out_c)
            print(f"{name:<24} {N:>5} {t_py:>11.4f} {t_c:>11.4f} {t_py / t_c:>8.1f} {str(same):>6}")


if __name__ == "__main__":
    main()
