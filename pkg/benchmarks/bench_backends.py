"""Compare the numba and pure-numpy solver backends on the reference plant.

Run:  python benchmarks/bench_backends.py [--sizes 1000 2000 4000]
"""

import argparse
import time

import numpy as np

from fracsim import _kernels
from fracsim.fode import plant
from fracsim.glops import _coeff_array

PLANT = plant(0.8, 2.2, 0.5, 0.9, 1.0)


def _tables(h, n):
    cl = np.ascontiguousarray(np.vstack([_coeff_array(t.order, n)[:n] for t in PLANT.lhs]))
    sl = np.array([t.coeff * h ** (-t.order) for t in PLANT.lhs])
    capl = np.full(len(PLANT.lhs), n, dtype=np.int64)
    cr = np.ascontiguousarray(_coeff_array(0.0, n)[:n][None, :])
    sr = np.array([1.0])
    capr = np.array([n], dtype=np.int64)
    w = np.ones(n)
    w[0] = 0.0
    denom = float(np.dot(sl, cl[:, 0]))
    return cl, sl, capl, cr, sr, capr, w, denom


def bench(backend, n, h=0.01, repeats=3):
    cl, sl, capl, cr, sr, capr, w, denom = _tables(h, n)
    best = float("inf")
    for _ in range(repeats):
        y = np.zeros(n)
        t0 = time.perf_counter()
        backend.solve(cl, sl, capl, cr, sr, capr, w, y, 1, denom, 1e12)
        best = min(best, time.perf_counter() - t0)
    return best, y


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 1000, 2000, 4000])
    args = ap.parse_args()

    backends = [_kernels._NumpyBackend]
    try:
        nb = _kernels._build_numba_backend()
        bench(nb, 100)  # trigger compilation outside the timed region
        backends.append(nb)
    except ImportError:
        print("numba not installed; benchmarking numpy backend only")

    print(f"{'n':>6}  " + "".join(f"{b.name:>12}" for b in backends) + "   speedup")
    for n in args.sizes:
        times = []
        results = []
        for b in backends:
            t, y = bench(b, n)
            times.append(t)
            results.append(y)
        if len(results) == 2:
            drift = float(np.abs(results[0] - results[1]).max())
            speed = times[0] / times[1]
            extra = f"{speed:9.1f}x   (max |diff| {drift:.2e})"
        else:
            extra = ""
        print(f"{n:>6}  " + "".join(f"{t * 1e3:10.2f}ms" for t in times) + "  " + extra)


if __name__ == "__main__":
    main()
