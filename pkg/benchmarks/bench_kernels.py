#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python twins.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import random
import time
from array import array

from acckit._kernels import _pure

try:
    from acckit._kernels import _speedups
except ImportError:
    _speedups = None


def bench(fn, args_list, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def lcs_cases(rng, n_cases, lo, hi):
    cases = []
    for _ in range(n_cases):
        m, n = rng.randint(lo, hi), rng.randint(lo, hi)
        a = array("i", (rng.randint(0, 40) for _ in range(m)))
        b = array("i", (rng.randint(0, 40) for _ in range(n)))
        cases.append((a, b))
    return cases


def span_cases(rng, n_cases, length, cap):
    cases = []
    for _ in range(n_cases):
        st = array("d", (rng.random() for _ in range(length)))
        ed = array("d", (rng.random() for _ in range(length)))
        cases.append((st, ed, cap))
    return cases


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = random.Random(0)

    suites = [
        ("lcs_len, short spans (2-8 words)", "lcs_len", lcs_cases(rng, 4000, 2, 8)),
        ("lcs_len, long spans (20-60 words)", "lcs_len", lcs_cases(rng, 800, 20, 60)),
        ("best_span, 300-word context, cap 30", "best_span", span_cases(rng, 500, 300, 30)),
    ]

    print(f"{'suite':45s} {'pure':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, fn_name, cases in suites:
        pure_t = bench(getattr(_pure, fn_name), cases, args.repeat)
        if _speedups is None:
            print(f"{name:45s} {pure_t * 1e3:9.2f}ms {'n/a':>10s} {'n/a':>8s}")
            continue
        fast_t = bench(getattr(_speedups, fn_name), cases, args.repeat)
        print(f"{name:45s} {pure_t * 1e3:9.2f}ms {fast_t * 1e3:9.2f}ms {pure_t / fast_t:7.1f}x")
    if _speedups is None:
        print("\ncompiled kernels not built; rebuild with `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
