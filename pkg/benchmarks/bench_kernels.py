"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]

Each row times one workload under both backends and reports the speedup.
The LP rows route the whole solver through the chosen backend, so they
measure the simplex loop that dominates the angle sweeps and geometry.
"""

import argparse
import time
from contextlib import contextmanager

import numpy as np

from recov import kernels
from recov.angles import mu_V_N
from recov.measure import make_measurements
from recov.solvers import LinearProgram, solve_lp
from recov.spaces import Space, make_subspace_presets

NAMES = ("simplex_iterate", "refactor", "cube_vertex_max", "riesz_product", "greedy_cover", "pairwise_max_dist")


@contextmanager
def backend(name):
    mod = kernels.get_backend(name)
    saved = {n: getattr(kernels, n) for n in NAMES}
    for n in NAMES:
        setattr(kernels, n, getattr(mod, n))
    try:
        yield mod
    finally:
        for n, f in saved.items():
            setattr(kernels, n, f)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(rng):
    A = rng.standard_normal((120, 80))
    b = A @ rng.uniform(0, 1, 80) + 1.0
    c = rng.standard_normal(80)
    lp = LinearProgram.from_parts(c, A_ub=A, b_ub=b, lower=-1.0, upper=1.0)
    P = np.ascontiguousarray(rng.standard_normal((16, 14)))
    wts = np.ones(16)
    signs = np.where(rng.uniform(size=(10, 4096)) < 0.5, -1, 1).astype(np.int8)
    w = rng.uniform(-1, 1, 10)
    C = np.ascontiguousarray(rng.standard_normal((3000, 3)))
    Q = np.ascontiguousarray(rng.standard_normal((600, 6)))
    sp = Space.interval(-np.pi, np.pi, 420, "SUP", "periodic")
    V = make_subspace_presets("TRIG(2)", sp)
    M = make_measurements("POINT_EVAL", {"m": 20}, sp)
    return [
        ("lp 120x80 (simplex)", lambda mod: solve_lp(lp, dualize=False)),
        ("mu sweep TRIG(2), N=420", lambda mod: mu_V_N(M, V)),
        ("cube_vertex_max m=14", lambda mod: mod.cube_vertex_max(P, wts, 0, 1.0)),
        ("riesz_product 10x4096", lambda mod: mod.riesz_product(signs, w)),
        ("greedy_cover 3000 pts", lambda mod: mod.greedy_cover(C, 0.3, 5000)),
        ("pairwise_max_dist 600", lambda mod: mod.pairwise_max_dist(Q, np.ones(6), 0, 1.0)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    try:
        kernels.get_backend("cython")
    except ImportError:
        print("compiled backend not built; run `python3 setup.py build_ext --inplace`")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'workload':28s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>9s}")
    for label, fn in workloads(rng):
        res = {}
        for name in ("python", "cython"):
            with backend(name) as mod:
                fn(mod)  # warm-up
                res[name] = best_of(lambda: fn(mod), args.repeat)
        print(f"{label:28s} {res['python']:12.5f} {res['cython']:12.5f} {res['python'] / res['cython']:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
