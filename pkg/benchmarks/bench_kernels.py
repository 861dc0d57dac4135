"""Compare the numba and numpy kernel backends on random transition systems.

The numpy saturation is dense (n x n), so keep state counts modest.

Run: python3 benchmarks/bench_kernels.py [--states N] [--repeat R]
"""

import argparse
import time

import numpy as np

from buffpi import _kernels
from buffpi.equivalence import partition


def random_system(rng, n, labels=4, degree=3, tau_share=0.15):
    # label 0 is tau; keep it rare so the tau-closure stays sparse
    m = n * degree
    src = rng.integers(0, n, m)
    lab = np.where(rng.random(m) < tau_share, 0, rng.integers(1, labels, m))
    dst = rng.integers(0, n, m)
    return src, lab, dst


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--states", type=int, nargs="+", default=[500, 1_000, 2_000])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    backends = ["numpy"] + (["numba"] if _kernels.numba is not None else [])
    print(f"{'states':>8} {'kernel':>10} " + " ".join(f"{b:>10}" for b in backends))
    for n in args.states:
        src, lab, dst = random_system(rng, n)
        results = {}
        for b in backends:
            _kernels.set_backend(b)
            ws, wl, wd = random_system(np.random.default_rng(1), 20)
            partition(20, ws, wl, wd)  # warm up compilation
            _kernels.saturate(20, ws, wl, wd, 0)
            tp, blocks = timed(lambda: partition(n, src, lab, dst)[-1], args.repeat)
            ts, sat = timed(lambda: _kernels.saturate(n, src, lab, dst, 0), args.repeat)
            results[b] = (tp, ts, blocks, sat)
        if len(backends) == 2:
            a, c = results["numpy"], results["numba"]
            assert np.array_equal(a[2], c[2]), "backends disagree on the partition"
            assert all(np.array_equal(x, y) for x, y in zip(a[3], c[3])), "backends disagree on saturation"
        print(f"{n:>8} {'partition':>10} " + " ".join(f"{results[b][0]:>9.4f}s" for b in backends))
        print(f"{n:>8} {'saturate':>10} " + " ".join(f"{results[b][1]:>9.4f}s" for b in backends))


if __name__ == "__main__":
    main()
