"""Compare the compiled and pure-Python integration kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Each case integrates one radial mode with both backends, checks the outputs
agree bit for bit, and prints the best wall time of ``--repeat`` runs.
"""

import argparse
import time

import numpy as np

from warpspec import kernels
from warpspec.geometry import Euclidean, Hyperbolic, ProfileDriven, SinLogPert, WarpedModel
from warpspec.radial import AngularMode, Potential

CASES = [
    ("euclidean n=3, lam=1, [0.01, 100]",
     WarpedModel(3, 0.01, Euclidean()), Potential.zero(), 1.0, 0, 100.0),
    ("hyperbolic n=2, well, [0.01, 200]",
     WarpedModel(2, 0.01, Hyperbolic()), Potential.well(2.0, 0.0, 1.0), 0.1, 0, 200.0),
    ("profile b=1 sin-log 0.2, l=2, [1, 2000]",
     WarpedModel(3, 1.0, ProfileDriven(1.0, 0.0, SinLogPert(0.2))),
     Potential.coulomb_like(0.5, 0.5), 0.8, 2, 2000.0),
]


def run(model, pot, lam, l, r_max, backend):
    mode = AngularMode(l, model.n)
    return kernels.integrate_native(model.native(), pot.native(), model.n, lam, mode.kappa_l,
                                    1.0, 0.0, float(model.log_f(model.r0)), model.r0, r_max,
                                    1e-10, backend=backend)


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled kernel unavailable; only the Python backend can run")
        return
    print(f"{'case':44s} {'steps':>7s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s}")
    for name, model, pot, lam, l, r_max in CASES:
        tc, oc = best_time(lambda: run(model, pot, lam, l, r_max, "cython"), args.repeat)
        tp, op = best_time(lambda: run(model, pot, lam, l, r_max, "python"), args.repeat)
        same = all(np.array_equal(a, b) for a, b in zip(oc[:4], op[:4]))
        print(f"{name:44s} {oc[0].size:7d} {tc:10.4f} {tp:10.4f} {tp / tc:8.1f}"
              + ("" if same else "  MISMATCH"))


if __name__ == "__main__":
    main()
