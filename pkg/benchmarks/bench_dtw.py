#!/usr/bin/env python3
"""Compare the compiled and pure-Python alignment kernels.

Times ``align`` on random distance matrices of increasing size, checks that
both backends return bit-identical results, and reports the speedup.  Run
from the repository root:

    python benchmarks/bench_dtw.py
    python benchmarks/bench_dtw.py --sizes 100x120,500x600 --repeats 9
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from mp3s_eval import _kernels


def parse_sizes(text: str) -> list[tuple[int, int]]:
    sizes = []
    for token in text.split(","):
        ta, _, tb = token.strip().partition("x")
        sizes.append((int(ta), int(tb)))
    return sizes


def time_align(kernel, dist: np.ndarray, repeats: int) -> tuple[float, tuple]:
    """Median wall time in ms and the (cost, path) result."""
    result = kernel.align(dist)  # warm-up, also the comparison value
    samples = []
    for _ in range(repeats):
        started = time.perf_counter()
        kernel.align(dist)
        samples.append((time.perf_counter() - started) * 1e3)
    return statistics.median(samples), result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--sizes",
        default="50x60,100x120,200x250,400x500,800x900",
        help="comma-separated TAxTB matrix sizes",
    )
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    pure = _kernels.get_backend("pure")
    try:
        compiled = _kernels.get_backend("compiled")
    except RuntimeError:
        print("compiled kernel not built in this installation; nothing to compare")
        return 1

    rng = np.random.default_rng(args.seed)
    print(f"default backend: {_kernels.BACKEND}")
    print(f"{'size':>10} {'pure ms':>10} {'compiled ms':>12} {'speedup':>8}  identical")
    for ta, tb in parse_sizes(args.sizes):
        dist = rng.random(size=(ta, tb))
        pure_ms, (pure_cost, pure_path) = time_align(pure, dist, args.repeats)
        comp_ms, (comp_cost, comp_path) = time_align(compiled, dist, args.repeats)
        identical = pure_cost == comp_cost and np.array_equal(pure_path, comp_path)
        print(
            f"{ta:>5}x{tb:<4} {pure_ms:>10.2f} {comp_ms:>12.2f} "
            f"{pure_ms / comp_ms:>7.1f}x  {identical}"
        )
        if not identical:
            print("  MISMATCH: backends disagree, this is a bug")
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
