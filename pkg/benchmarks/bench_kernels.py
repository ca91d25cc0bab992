"""Benchmark the coalition/share kernels: numba @njit vs pure numpy.

Usage: python benchmarks/bench_kernels.py [max_n]

Times the full hot path (member-bound tables + all three share vectors)
on random appraisal matrices.  The numba path is warmed up first so JIT
compilation does not pollute the numbers.
"""

import sys
import time

import numpy as np

from revalloc import _kernels
from revalloc.game import shapley_triples


def run_once(E, backend):
    start = time.perf_counter()
    shapley_triples(E, backend=backend)
    return time.perf_counter() - start


def bench(n, rng, repeats=3):
    E = rng.uniform(0.05, 1.0, (n, n))
    np.fill_diagonal(E, 1.0)
    row = {"n": n}
    backends = ["numpy"] + (["numba"] if _kernels.NUMBA_AVAILABLE else [])
    for backend in backends:
        run_once(E, backend)  # warmup (JIT compile / cache touch)
        row[backend] = min(run_once(E, backend) for _ in range(repeats))
    return row


def main():
    max_n = int(sys.argv[1]) if len(sys.argv) > 1 else 18
    rng = np.random.default_rng(0)
    print(f"numba available: {_kernels.NUMBA_AVAILABLE}")
    header = f"{'n':>4} {'numpy':>12}" + (f" {'numba':>12} {'speedup':>8}"
                                          if _kernels.NUMBA_AVAILABLE else "")
    print(header)
    for n in range(10, max_n + 1, 2):
        row = bench(n, rng)
        line = f"{row['n']:>4} {row['numpy'] * 1e3:>10.1f}ms"
        if "numba" in row:
            line += f" {row['numba'] * 1e3:>10.1f}ms {row['numpy'] / row['numba']:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
