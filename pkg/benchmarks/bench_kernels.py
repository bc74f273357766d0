"""Compare the numba and numpy kernel backends.

Times each hot kernel on representative shapes and one end-to-end pendulum
period map (third-order jet), once per backend.  The first numba call is
excluded (compilation); reported numbers are best-of-``--repeat``.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5] [--skip-pipeline]
"""

import argparse
import math
import time

import numpy as np

from crlohner import kernels
from crlohner.interval import Interval
from crlohner.lohner import CnSet, StepConfig, integrate
from crlohner.certify import pendulum_field


def _pair(rng, shape, width=1e-9):
    lo = rng.standard_normal(shape)
    return lo, lo + width * rng.random(shape)


def _best(fn, repeat):
    fn()
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def kernel_cases(rng):
    a = _pair(rng, (64, 3, 3))
    b = _pair(rng, (64, 3, 3))
    u = _pair(rng, (400, 21))
    v = _pair(rng, (400, 21))
    s = _pair(rng, (200, 40, 3))
    A = _pair(rng, (17, 3, 3))
    B = _pair(rng, (16, 10, 3))
    x0 = _pair(rng, (10, 3))
    return {
        "matmul 64x(3x3)": lambda: kernels.matmul(*a, *b),
        "cauchy 400x21": lambda: kernels.cauchy(*u, *v),
        "sum_axis 200x40x3": lambda: kernels.sum_axis(*s, 1),
        "linrec o=16 m=10": lambda: kernels.linrec(*A, *B, *x0, 16),
    }


def pipeline():
    vf = pendulum_field(6.0)
    x = Interval([-1e-4, -0.1715, 0.0], [1e-4, -0.1713, 0.0])
    T = 2 * math.pi / 6.0
    integrate(vf, CnSet.from_box(x, 3), T, T / 20, StepConfig(order=16))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-pipeline", action="store_true")
    args = ap.parse_args()
    backends = kernels.available_backends()
    rows = {}
    for name in backends:
        kernels.set_backend(name)
        cases = kernel_cases(np.random.default_rng(0))
        if not args.skip_pipeline:
            cases["pendulum period map r=3"] = pipeline
        for label, fn in cases.items():
            rows.setdefault(label, {})[name] = _best(fn, args.repeat)
    width = max(len(k) for k in rows)
    print(f"{'kernel':<{width}}  " + "  ".join(f"{b:>12}" for b in backends) + "  speedup")
    for label, t in rows.items():
        cells = "  ".join(f"{t[b] * 1e3:>10.3f}ms" for b in backends)
        sp = f"{t['numpy'] / t['numba']:.1f}x" if "numba" in t else "-"
        print(f"{label:<{width}}  {cells}  {sp}")


if __name__ == "__main__":
    main()
