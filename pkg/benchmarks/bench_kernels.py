#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times each hot kernel on solver-sized inputs and a full group solve under
both backends. Run directly:

    python benchmarks/bench_kernels.py [--n 1024] [--repeat 2000]
"""

import argparse
import time

import numpy as np

from cwss import BandPlan, draw_pattern, forward, kernels
from cwss.solver import SolverOptions, solve_group


def bench(fn, repeat):
    fn()  # warm-up (numba compilation, cache touch)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=1024)
    parser.add_argument("--repeat", type=int, default=2000)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    n = args.n
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    plan = BandPlan(
        n=n,
        boundaries=tuple(int(b * n / 1024) for b in (61, 123, 246, 348, 614, 717, 860, 922)),
    )
    starts, stops = plan.starts, plan.stops
    tau = rng.uniform(0.5, 5.0, size=plan.k)

    cases = {
        "soft_threshold": lambda: kernels.soft_threshold(v, 0.7),
        "group_soft_threshold": lambda: kernels.group_soft_threshold(v, starts, stops, tau),
        "section_norms": lambda: kernels.section_norms(v, starts, stops),
        "section_l1": lambda: kernels.section_l1(v, starts, stops),
    }

    pattern = draw_pattern(n, 0.4, 7)
    r_true = np.zeros(n, dtype=np.complex128)
    r_true[starts[1] : stops[1]] = rng.uniform(0.002, 0.007, stops[1] - starts[1])
    y = forward(r_true, pattern)
    y = y + 0.05 * np.linalg.norm(y) / np.sqrt(pattern.m) * (
        rng.normal(size=pattern.m) + 1j * rng.normal(size=pattern.m)
    )
    eta = 0.2 * np.linalg.norm(y)
    opts = SolverOptions()

    def full_solve():
        solve_group(y, pattern, plan, np.ones(plan.k), eta, opts)

    available = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    original = kernels.get_backend()
    results = {}
    try:
        for backend in available:
            kernels.set_backend(backend)
            results[backend] = {
                name: bench(fn, args.repeat) for name, fn in cases.items()
            }
            results[backend]["group solve (end-to-end)"] = bench(
                full_solve, max(1, args.repeat // 200)
            )
    finally:
        kernels.set_backend(original)

    rows = list(results[available[0]])
    width = max(len(r) for r in rows)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{b:>12}" for b in available)
    if len(available) == 2:
        header += f"  {'speedup':>8}"
    print(f"n = {n}, repeat = {args.repeat}")
    print(header)
    for row in rows:
        line = f"{row:<{width}}  " + "  ".join(
            f"{results[b][row] * 1e6:>10.2f}us" for b in available
        )
        if len(available) == 2:
            line += f"  {results['numpy'][row] / results['numba'][row]:>7.2f}x"
        print(line)


if __name__ == "__main__":
    main()
