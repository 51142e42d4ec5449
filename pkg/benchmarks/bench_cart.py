"""Time CART fits with the compiled and pure-Python kernels.

    python3 benchmarks/bench_cart.py [--n 1000] [--reps 20]
"""
import argparse
import time

import numpy as np

from synutil import _kernels
from synutil.data import DatasetPair
from synutil.fixtures import load_fixture
from synutil.harness import synth_catall
from synutil.propensity import CartFitter, CartParams


def bench(backend, fitter_args, reps):
    fitter = CartFitter(*fitter_args, backend=backend)
    fitter.fit()
    t0 = time.perf_counter()
    for _ in range(reps):
        s = fitter.fit()
    return (time.perf_counter() - t0) / reps, s


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()
    orig, syn = load_fixture("fixture10")
    ds4 = load_fixture("fixture4")
    cases = {
        "fixture4 (n=500+500, 4 cat)": (DatasetPair(ds4, synth_catall(ds4, 1, 3)[0]), CartParams()),
        "fixture10 (n=1000+1000, mixed)": (DatasetPair(orig, syn), CartParams()),
    }
    backends = _kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    for label, (pr, params) in cases.items():
        times, outs = {}, {}
        for b in backends:
            times[b], outs[b] = bench(b, (pr, params), args.reps)
        line = "  ".join(f"{b} {1e3 * t:8.2f} ms" for b, t in times.items())
        if len(backends) == 2:
            same = np.array_equal(outs["cython"].p_hat, outs["python"].p_hat)
            line += f"  speedup {times['python'] / times['cython']:5.1f}x  identical={same}"
        print(f"{label:<32} {line}")


if __name__ == "__main__":
    main()
