"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--sizes 250 500 1000] [--repeat 5]

Prints best-of-N wall times per backend and the speedup.
"""
import argparse
import time

import numpy as np

from shapemine import kernels
from shapemine.matcher import noisy_match, parse_lse
from shapemine.segmentation import segment_fixed_count, segment_min_count
from shapemine.signal import Signal

LSE = parse_lse(
    "(line(a_U, b_U, d_U) . line(a_D, b_D, d_D))* : a_U in [0, 1] and d_U in [5, 80] "
    "and a_D in [-1, 0] and d_D in [5, 80]")


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = ["python"] + (["cython"] if kernels.compiled is not None else [])
    if len(backends) == 1:
        print("compiled kernels are not built; timing the Python backend only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'n':>6}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for n in args.sizes:
        v = np.cumsum(rng.normal(size=n)) * 0.1 + np.sin(np.arange(n) / 20)
        sig = Signal.uniform(v)
        cases = {
            "min-count": lambda b: segment_min_count(sig, 0.05, b),
            "fixed-count": lambda b: segment_fixed_count(sig, 8, b),
            "match": lambda b: noisy_match(sig, LSE, 0.5, b),
        }
        for name, fn in cases.items():
            times = [best_time(lambda: fn(b), args.repeat) for b in backends]
            speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else ""
            print(f"{name:<14}{n:>6}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
