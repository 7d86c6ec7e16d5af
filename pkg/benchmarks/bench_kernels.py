"""Time the compiled kernels against the pure-Python fallback.

Each workload runs through the public API with the backend switched by
``hierlab._kernels.use_backend``; results from the two backends are compared
before timings are reported.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]
"""

import argparse
import time

import numpy as np

from hierlab import _kernels
from hierlab.curvature import curvature_table, transport
from hierlab.generators import ba_generate, hnm_generate
from hierlab.graph import betweenness
from hierlab.hyperbolic import embed_train


def workloads(quick):
    hnm, _ = hnm_generate(4, 3 if quick else 4)
    ba = ba_generate(300 if quick else 1000, 2, 0)
    rng = np.random.default_rng(0)
    k = 40 if quick else 120
    a, b = rng.random(k), rng.random(k)
    a, b = a / a.sum(), b / b.sum()
    cost = rng.integers(0, 5, (k, k)).astype(float)
    return {
        "transport": lambda: transport(a, b, cost),
        "betweenness": lambda: betweenness(ba),
        "embedding (10 epochs)": lambda: embed_train(hnm, epochs=10, seed=0).points,
        "curvature table": lambda: curvature_table(hnm).kappa,
    }


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args(argv)
    if "cython" not in _kernels.AVAILABLE:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    print(f"{'kernel':<24}{'python (s)':>12}{'cython (s)':>12}{'speedup':>10}")
    for name, fn in workloads(args.quick).items():
        res = {}
        for backend in ("python", "cython"):
            prev = _kernels.use_backend(backend)
            try:
                res[backend] = best_of(fn, args.repeat)
            finally:
                _kernels.backend = prev
        (tp, op), (tc, oc) = res["python"], res["cython"]
        if not np.allclose(op, oc, atol=1e-8):
            print(f"{name:<24} backends disagree")
            continue
        print(f"{name:<24}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
