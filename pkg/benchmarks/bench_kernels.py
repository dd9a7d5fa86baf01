"""Compare the compiled and numpy kernels on one refinement pass and a batch of box sums.

Run with ``python3 benchmarks/bench_kernels.py [--beta 1/200] [--repeat 3]``.
"""
import argparse
import time
from fractions import Fraction

import numpy as np

from tailcert import _pykernels, dp
from tailcert.dp import _sign_arrays

try:
    from tailcert import _ckernels
except ImportError:
    _ckernels = None


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", default="1/200")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--boxes", type=int, default=200)
    args = ap.parse_args()

    grid = dp.build_initial(Fraction(args.beta), subdivisions=64)
    sm, sp = _sign_arrays(grid)
    beta, x_min = float(grid.beta), float(grid.x_min)
    rng = np.random.default_rng(0)
    boxes = []
    for _ in range(args.boxes):
        hi = np.sort(rng.uniform(0.05, 0.5, size=6))[::-1].copy()
        boxes.append((hi - 0.01, hi))

    backends = [("numpy", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    results = {}
    print(f"grid {grid.a_points} x {grid.x_points}, {args.boxes} box sums over 64 patterns")
    for name, mod in backends:
        t_ref, out = best_time(lambda: mod.refine_pass(grid.values, beta, x_min, sm, sp), args.repeat)
        t_box, sums = best_time(lambda: [mod.box_sum(grid.values, beta, x_min, lo, hi, 1.0) for lo, hi in boxes],
                                args.repeat)
        results[name] = (out, sums)
        print(f"{name:7s} refine pass {t_ref * 1e3:9.1f} ms   box sums {t_box * 1e3:9.1f} ms")
    if len(results) == 2:
        same = (results["numpy"][0].tobytes() == results["cython"][0].tobytes()
                and results["numpy"][1] == results["cython"][1])
        print("outputs bit-identical:", same)
    else:
        print("compiled kernels not built; only the numpy back end was timed")


if __name__ == "__main__":
    main()
