"""Compare the compiled and pure-Python Daubechies-Lagarias kernels.

    python benchmarks/bench_kernels.py [--points 200000] [--repeat 3]

Prints best-of-``repeat`` wall times for the raw kernel on several filters,
and for a full partial-data fit, under each available backend.
"""

import argparse
import timeit

import numpy as np

from survwave import _backend, estimator
from survwave import wavelet_basis as wb
from survwave.censoring import CensoredSample


def bench_kernel(fn, filt, t, depth, repeat):
    T0, T1, v0 = wb.refinement_matrices(filt)
    return min(timeit.repeat(lambda: fn(T0, T1, v0, t, depth), number=1, repeat=repeat))


def bench_fit(fn, n, repeat):
    rng = np.random.default_rng(0)
    y = rng.uniform(0.01, 1.0, n)
    s = estimator.normalize(CensoredSample(y, (rng.uniform(size=n) < 0.6).astype(int)))
    filt = wb.load_filter("symmlet5")
    saved = _backend.dl_values
    _backend.dl_values = fn
    try:
        return min(timeit.repeat(lambda: estimator.fit_partial(s, filt, 7), number=1, repeat=repeat))
    finally:
        _backend.dl_values = saved


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--points", type=int, default=200_000)
    p.add_argument("--depth", type=int, default=wb.DEFAULT_DEPTH)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    backends = _backend.available_backends()
    if "cython" not in backends:
        print("compiled kernel not built; only the fallback is timed")
    t = np.random.default_rng(1).uniform(size=args.points)
    names = list(backends)
    print(f"{'case':<28}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    rows = []
    for filt_name in ("haar", "daubechies2", "symmlet5", "daubechies10"):
        filt = wb.load_filter(filt_name)
        rows.append((f"kernel {filt_name}", [bench_kernel(backends[n], filt, t, args.depth, args.repeat)
                                             for n in names]))
    rows.append((f"fit_partial N={args.points}", [bench_fit(backends[n], args.points, args.repeat)
                                                   for n in names]))
    for label, times in rows:
        line = f"{label:<28}" + "".join(f"{v:>11.3f}s" for v in times)
        if len(times) > 1:
            line += f"{times[0] / times[1]:>11.2f}x"
        print(line)


if __name__ == "__main__":
    main()
