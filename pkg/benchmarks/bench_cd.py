"""Time the compiled and pure-Python coordinate-descent kernels on one Lasso path.

    python3 benchmarks/bench_cd.py [--n 200] [--p 400] [--repeat 3]
"""

import argparse
import time

import numpy as np

from lasso_tradeoff import kernels
from lasso_tradeoff.lasso_sim import default_grid, fixed_signal, gen_instance, lasso_path


def time_path(instance, grid, backend, repeat):
    best = np.inf
    trace = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        trace = lasso_path(instance, grid, max_jump=None, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, trace


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--p", type=int, default=400)
    ap.add_argument("--k", type=int, default=40)
    ap.add_argument("--num", type=int, default=30, help="grid points")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    inst = gen_instance(args.n, args.p, fixed_signal(args.p, args.k, 3.0), 1.0, seed=1)
    grid = default_grid(inst, num=args.num)
    print(f"n={args.n} p={args.p} k={args.k} grid={args.num} points, default backend: {kernels.BACKEND}")

    backends = {"python": kernels.python_cd_sweeps}
    if kernels.BACKEND == "cython":
        backends["cython"] = kernels.cd_sweeps
    times = {}
    supports = {}
    for name, fn in backends.items():
        times[name], trace = time_path(inst, grid, fn, args.repeat)
        supports[name] = [rec.support for rec in trace.records]
        print(f"{name:>7}: {times[name]:8.3f} s")
    if len(times) == 2:
        same = supports["python"] == supports["cython"]
        print(f"speedup: {times['python'] / times['cython']:.1f}x, identical supports: {same}")


if __name__ == "__main__":
    main()
