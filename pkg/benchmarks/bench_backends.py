#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure-Python fallback.

Runs the same workloads through selfsim._kernels._fast and ._pure and
prints per-task timings plus the speedup. Invoke from the repo root:

    python benchmarks/bench_backends.py [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

from selfsim._kernels import _fast, _pure


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def task_expander_sweep(impl):
    # 60 expander integrations across four decades of starting heights
    for a in np.geomspace(1e-4, 5.0, 60):
        r0 = 1e-4 * a
        c = (0.5 * a + 1.0 / a) / 4.0
        impl.integrate_profile(1, 2.0, 2.0, r0, r0, a + c * r0 * r0,
                               math.atan(2 * c * r0), 1e-10, 1e-12, 10.0,
                               400_000, r0 / 20.0, 0.25, -1e300, 1e300,
                               0.0, 0.0, 0.0, min(1e-7, 0.05 * a), 1e-11, 1e12)


def task_shrinker_classify(impl):
    # 40 shrinker classifications with escape triggers
    for a in np.geomspace(5e-3, 1.3, 40):
        r0 = 1e-4 * a
        c = ((1.0) / a - 0.5 * a) / 4.0
        impl.integrate_profile(2, 2.0, 2.0, r0, r0, a + c * r0 * r0,
                               math.atan(2 * c * r0), 1e-10, 1e-12, 10.0,
                               400_000, r0 / 20.0, 0.25, -1e-6,
                               math.pi / 2 + 1e-6, 0.0, 0.0, 0.0,
                               min(1e-7, 0.05 * a), 1e-11, 1e12)


def task_flow_steps(impl):
    # 2000 velocity evaluations on a 400-marker front
    phi = np.linspace(0.0, 0.5 * math.pi, 400)
    r = np.ascontiguousarray(np.sin(phi))
    u = np.ascontiguousarray(np.cos(phi))
    r[0] = 0.0
    u[-1] = 0.0
    for _ in range(2000):
        impl.flow_velocity(r, u, 1.0, 2.0, 0, 1)


TASKS = [
    ("expander sweep (60 runs)", task_expander_sweep),
    ("shrinker classify (40 runs)", task_shrinker_classify),
    ("flow velocity (2000 x 400 markers)", task_flow_steps),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"{'task':<40} {'compiled':>10} {'pure':>10} {'speedup':>9}")
    for name, task in TASKS:
        t_fast = _time(lambda: task(_fast), args.repeat)
        t_pure = _time(lambda: task(_pure), args.repeat)
        print(f"{name:<40} {t_fast:>9.3f}s {t_pure:>9.3f}s {t_pure / t_fast:>8.1f}x")


if __name__ == "__main__":
    main()
