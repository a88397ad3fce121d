"""Compare the compiled and pure-Python return-word kernels.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from thermoshift import kernels
from thermoshift.sft import build_sft

CASES = [
    ("golden mean, L=28", 2, ["11"], (1, 1), 4, 28),
    ("three symbols, L=14", 3, ["11", "22"], (1, 1), 4, 14),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    py = kernels.backend("python")
    try:
        cy = kernels.backend("cython")
    except ImportError:
        cy = None
        print("compiled kernels not built; timing the Python fallback only")

    print(f"{'case':<24}{'words':>10}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for label, m, blocks, (a, b), N, L in CASES:
        spec = build_sft(m, forbidden_blocks=blocks)
        allowed = spec.allowed.astype("uint8")
        ess = spec.essential_mask.astype("uint8")
        run_py = lambda: py.enumerate_returns(allowed, ess, a, b, N, L, 10 ** 8)
        words = len(run_py()[0])
        t_py = best_of(run_py, args.repeat)
        if cy is not None:
            t_cy = best_of(lambda: cy.enumerate_returns(allowed, ess, a, b, N, L, 10 ** 8), args.repeat)
            print(f"{label:<24}{words:>10}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>10.1f}")
        else:
            print(f"{label:<24}{words:>10}{t_py:>12.4f}{'-':>12}{'-':>10}")

    rng = np.random.default_rng(0)
    spec = build_sft(3, forbidden_blocks=["11", "22"])
    allowed = spec.allowed.astype("uint8")
    ess = spec.essential_mask.astype("uint8")
    words = [list(rng.integers(0, 3, size=200)) for _ in range(2000)]
    t_py = best_of(lambda: [py.delta_profile(allowed, ess, w) for w in words], args.repeat)
    if cy is not None:
        t_cy = best_of(lambda: [cy.delta_profile(allowed, ess, w) for w in words], args.repeat)
        print(f"{'delta profile, 2000x200':<24}{'':>10}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>10.1f}")


if __name__ == "__main__":
    main()
