#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Usage:
    python benchmarks/bench_backends.py [--t-end T] [--iters N] [--repeats R]

Timings exclude jit compilation (one warm-up call per kernel).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import dinavd
from dinavd.dynamics import DynamicsParams
from dinavd.solvers import AlgoParams


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-end", type=float, default=100.0)
    ap.add_argument("--iters", type=int, default=20_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    quad = dinavd.make_instance("quad1d")
    ill = dinavd.make_instance("illcond2d")
    lasso = dinavd.make_instance("lasso", 1)

    p1 = DynamicsParams(alpha=3.1, beta=1.0, t0=1.0, x0=[1.0], v0=[-3.0],
                        t_end=args.t_end, step=1e-3)
    p2 = DynamicsParams(alpha=3.1, beta=1.0, t0=1.0, x0=[1.0, 1.0], v0=[0.0, 0.0],
                        t_end=args.t_end, step=1e-3)
    ps = AlgoParams(alpha=3.1, beta=1.0, h=0.01, iterations=args.iters,
                    lipschitz=lasso.smooth.lipschitz_grad)

    cases = [
        ("rk4 second-order, quad1d",
         lambda b: dinavd.integrate_dinavd_2nd(quad.smooth, p1, backend=b)),
        ("rk4 second-order, illcond2d",
         lambda b: dinavd.integrate_dinavd_2nd(ill.smooth, p2, backend=b)),
        ("rk4 first-order, illcond2d",
         lambda b: dinavd.integrate_dinavd_1st(ill.smooth, p2, backend=b)),
        ("ifb_avd, lasso 20x50",
         lambda b: dinavd.run_ifb_avd(lasso, ps, np.zeros(50), backend=b)),
        ("fista, lasso 20x50",
         lambda b: dinavd.run_fista(lasso, ps, np.zeros(50), backend=b)),
    ]

    print(f"{'case':34s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, run in cases:
        run("numba")  # compile outside the timed region
        tn = _time(lambda: run("numba"), args.repeats)
        tp = _time(lambda: run("numpy"), args.repeats)
        print(f"{name:34s} {tn * 1e3:9.1f}ms {tp * 1e3:9.1f}ms {tp / tn:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
