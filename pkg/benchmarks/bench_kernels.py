#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--rows 50000,200000] [--bits 16]
                                          [--features 4] [--repeats 5]

Times one full embed and one full decode sweep per backend (per-feature
change logs included) and reports the speedup. The two backends are
bit-identical; see tests/test_kernels.py.
"""

import argparse
import importlib
import time

import numpy as np

from tabmark._kernels import numpy_backend


def load_backends():
    backends = [("numpy", numpy_backend)]
    try:
        backends.append(("cython",
                         importlib.import_module("tabmark._kernels._fastpath")))
    except ImportError:
        pass
    return backends


def make_columns(rows, features, seed):
    rng = np.random.default_rng(seed)
    columns = []
    for _ in range(features):
        values = rng.uniform(0.5, 400.0, size=rows)
        values[0] = 0.4
        values[1] = 401.0
        columns.append(values)
    return columns


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench(rows, n_bits, features, repeats, seed=0):
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=n_bits).astype(np.uint8)
    columns = make_columns(rows, features, seed)
    rate = 5e-4
    results = {}
    for name, impl in load_backends():
        def embed_all():
            return [impl.embed_feature(col, bits, rate, float(col.min()),
                                       float(col.max())) for col in columns]

        def trial_embed_all():
            # the optimizer's fitness path: no change log is recorded
            for col in columns:
                impl.embed_feature(col, bits, rate, float(col.min()),
                                   float(col.max()), record=False)

        embed_time = best_of(embed_all, repeats)
        trial_time = best_of(trial_embed_all, repeats)
        marked = embed_all()
        threshold = 2.0 * rate * rate * 400.0

        def decode_all():
            for values, changes, applied in marked:
                impl.decode_feature(values, changes, applied, rate, threshold)

        decode_time = best_of(decode_all, repeats)
        results[name] = (embed_time, trial_time, decode_time)
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", default="50000,200000")
    parser.add_argument("--bits", type=int, default=16)
    parser.add_argument("--features", type=int, default=4)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"{'rows':>9} {'backend':>8} {'embed_s':>10} {'trial_s':>10} "
          f"{'decode_s':>10} {'embed_x':>8} {'trial_x':>8} {'decode_x':>9}")
    for rows in (int(r) for r in args.rows.split(",")):
        results = bench(rows, args.bits, args.features, args.repeats)
        base = results["numpy"]
        for name, times in results.items():
            speedups = [b / t for b, t in zip(base, times)]
            print(f"{rows:>9} {name:>8} {times[0]:>10.4f} {times[1]:>10.4f} "
                  f"{times[2]:>10.4f} {speedups[0]:>8.2f} {speedups[1]:>8.2f} "
                  f"{speedups[2]:>9.2f}")


if __name__ == "__main__":
    main()
