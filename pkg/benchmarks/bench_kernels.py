"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 100 500 2000] [--repeat 5]
"""

import argparse
import math
import timeit

import numpy as np

from amrpe import _fallback, kernels
from amrpe.synthetic import document_spg


def _inputs(n: int, seed: int):
    spg = document_spg(n, seed=seed)
    edges = np.asarray(spg.edges, dtype=np.int64).reshape(-1, 2)
    src = np.ascontiguousarray(edges[:, 0])
    dst = np.ascontiguousarray(edges[:, 1])
    theta = 2 * math.pi * 0.25
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(n, 30)) + 1j * rng.normal(size=(n, 30))
    return (src, dst, n, math.cos(theta), math.sin(theta)), np.ascontiguousarray(V), len(edges)


def _best(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 500, 2000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    compiled = kernels._compiled
    if compiled is None:
        print("compiled extension not available; only the fallback is timed")
    print(f"{'kernel':<20}{'n':>6}{'|E|':>7}{'cython ms':>12}{'numpy ms':>11}{'speedup':>9}  identical")
    for n in args.sizes:
        lap_args, V, n_edges = _inputs(n, seed=n)
        for name, call in (
            ("magnetic_laplacian", lambda m: m.magnetic_laplacian(*lap_args)),
            ("gauge_fix (k=30)", lambda m: m.gauge_fix(V, 1e-8)),
        ):
            t_py = _best(lambda: call(_fallback), args.repeat)
            if compiled is None:
                print(f"{name:<20}{n:>6}{n_edges:>7}{'-':>12}{t_py * 1e3:>11.3f}{'-':>9}  -")
                continue
            t_cy = _best(lambda: call(compiled), args.repeat)
            same = np.array_equal(call(compiled), call(_fallback))
            print(f"{name:<20}{n:>6}{n_edges:>7}{t_cy * 1e3:>12.3f}{t_py * 1e3:>11.3f}{t_py / t_cy:>8.1f}x  {same}")


if __name__ == "__main__":
    main()
