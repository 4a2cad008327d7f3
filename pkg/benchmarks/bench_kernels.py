#!/usr/bin/env python3
"""Benchmark the compiled slot loop against the pure-Python fallback.

Both kernels consume identical pregenerated draws, so besides timing this
doubles as an end-to-end parity check on a full-size run.

Usage: python benchmarks/bench_kernels.py [--slots N] [--repeat K]
"""

import argparse
import time
from dataclasses import replace

from actage import default_config, sim


def time_kernel(cfg, kernel, slots, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = sim.run(cfg, service_mode="geometric", slots=slots,
                         seed=2024, kernel=kernel)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--slots", type=int, default=10 ** 6)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    cfg = default_config()
    kernels = sim.available_kernels()
    print(f"kernels available: {', '.join(kernels)}")
    print(f"horizon: {args.slots} slots, best of {args.repeat}\n")

    results = {}
    for kernel in kernels:
        elapsed, result = time_kernel(cfg, kernel, args.slots, args.repeat)
        rate = args.slots / elapsed / 1e6
        results[kernel] = (elapsed, result)
        print(f"{kernel:>7}: {elapsed:8.3f} s   {rate:7.1f} M slots/s")

    if len(results) == 2:
        fast = results["cython"]
        slow = results["python"]
        print(f"\nspeedup: x{slow[0] / fast[0]:.1f}")
        a = replace(fast[1], kernel="x")
        b = replace(slow[1], kernel="x")
        print(f"bit-identical results: {a == b}")


if __name__ == "__main__":
    main()
