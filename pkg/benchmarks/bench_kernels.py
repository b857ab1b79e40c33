"""Compare the compiled Ryser kernel with the numpy fallback.

    python benchmarks/bench_kernels.py --sizes 12 16 20 22 --repeat 3
"""

import argparse
import time

import numpy as np

from permabound import _ryser_py
from permabound.permanent import chunk_plan

try:
    from permabound import _ryser
except ImportError:
    _ryser = None


def run_kernel(kernel, z):
    at = np.ascontiguousarray(z.T)
    total = 0j
    for lo, hi in chunk_plan(z.shape[0]):
        total += kernel.ryser_range(at, lo, hi)
    return total


def best_time(kernel, z, repeat):
    best = float("inf")
    value = None
    for _ in range(repeat):
        start = time.perf_counter()
        value = run_kernel(kernel, z)
        best = min(best, time.perf_counter() - start)
    return best, value


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[10, 14, 18, 20, 22])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'n':>3}  {'compiled s':>11}  {'numpy s':>9}  {'ratio':>6}  {'rel diff':>9}")
    for n in args.sizes:
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        t_py, v_py = best_time(_ryser_py, z, args.repeat)
        if _ryser is None:
            print(f"{n:>3}  {'n/a':>11}  {t_py:>9.4f}")
            continue
        t_c, v_c = best_time(_ryser, z, args.repeat)
        diff = abs(v_c - v_py) / abs(v_c)
        print(f"{n:>3}  {t_c:>11.4f}  {t_py:>9.4f}  {t_py / t_c:>6.1f}  {diff:>9.1e}")


if __name__ == "__main__":
    main()
