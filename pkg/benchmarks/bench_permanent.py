"""Benchmark the compiled permanent kernel against the pure-Python fallback.

Usage: python3 benchmarks/bench_permanent.py [max_n]

Times both backends on random complex matrices (the transition-amplitude
workload) and on a full four-mode chip evolution, then prints the speedup.
"""

import sys
import time

import numpy as np

from noonchip import _ryser_py, kernels
from noonchip.circuit import ChipParams
from noonchip.evolve import output_distribution

try:
    from noonchip import _ryser as _compiled
except ImportError:
    _compiled = None


def time_callable(fn, matrices, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for m in matrices:
            fn(m)
        best = min(best, time.perf_counter() - start)
    return best / len(matrices)


def main() -> int:
    max_n = int(sys.argv[1]) if len(sys.argv) > 1 else 14
    rng = np.random.default_rng(2718)
    print(f"active backend: {kernels.BACKEND}")
    if _compiled is None:
        print("compiled kernel unavailable; timing the fallback only")

    header = f"{'n':>3} {'python (us)':>14} {'compiled (us)':>14} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in range(2, max_n + 1):
        count = 40 if n <= 10 else 8
        repeats = 5 if n <= 10 else 2
        mats = [
            np.ascontiguousarray(
                rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            )
            for _ in range(count)
        ]
        t_py = time_callable(_ryser_py.permanent, mats, repeats)
        if _compiled is not None:
            t_c = time_callable(_compiled.permanent, mats, repeats)
            print(f"{n:>3} {t_py * 1e6:>14.2f} {t_c * 1e6:>14.2f} {t_py / t_c:>8.1f}x")
        else:
            print(f"{n:>3} {t_py * 1e6:>14.2f} {'-':>14} {'-':>9}")

    # end-to-end: full 8-photon output distribution through the chip
    u = ChipParams(phi=0.9).matrix()
    start = time.perf_counter()
    output_distribution(u, (0, 4, 4, 0))
    print(
        f"\nchip output distribution, 8 photons over 4 modes: "
        f"{(time.perf_counter() - start) * 1e3:.1f} ms ({kernels.BACKEND} backend)"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
