"""Compare the compiled and pure-Python kernels on random transition graphs.

    python benchmarks/bench_kernels.py [--edges 10000 100000 1000000] [--labels 4] [--repeat 3]

Prints one row per (size, kernel) with the best-of-N wall time in
milliseconds and the speedup of the compiled kernels.
"""

import argparse
import time

import numpy as np

from freeterm import _pykernels
from freeterm._backend import compiled_kernels
from freeterm.automaton import Query, Semiautomaton, build_graph


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000


def bench(mod, graph, codes, repeat):
    n = graph.num_states
    scc = best_of(lambda: mod.scc(n, graph.indptr, graph.indices), repeat)
    bfs = best_of(lambda: mod.bfs(n, graph.indptr, graph.indices, [0], -1), repeat)
    sweep = best_of(lambda: mod.ft_sweep(n, graph.indptr, graph.indices, graph.rindptr, graph.rindices,
                                         graph.scc_id, graph.num_sccs, codes), repeat)
    return scc, bfs, sweep


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--edges", type=int, nargs="+", default=[10**4, 10**5, 10**6])
    parser.add_argument("--labels", type=int, default=4)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    compiled = compiled_kernels()
    if compiled is None:
        print("compiled kernels are not built; run `python setup.py build_ext --inplace` first")
    rng = np.random.default_rng(args.seed)
    print(f"{'edges':>9} {'kernel':>8} {'scc ms':>9} {'bfs ms':>9} {'sweep ms':>9} {'total ms':>9} {'speedup':>8}")
    for edges in args.edges:
        n = max(1, edges // args.labels)
        automaton = Semiautomaton(rng.integers(0, n, size=(n, args.labels)), check_reachable=False)
        graph = build_graph(automaton)
        codes = np.ascontiguousarray(Query(rng.integers(0, 2, size=n).tolist()).codes, dtype=np.intp)
        rows = [("python", bench(_pykernels, graph, codes, args.repeat))]
        if compiled is not None:
            rows.append(("cython", bench(compiled, graph, codes, args.repeat)))
        base = sum(rows[0][1])
        for name, times in rows:
            total = sum(times)
            print(f"{edges:>9} {name:>8} {times[0]:>9.2f} {times[1]:>9.2f} {times[2]:>9.2f} {total:>9.2f} "
                  f"{base / total:>7.1f}x")


if __name__ == "__main__":
    main()
