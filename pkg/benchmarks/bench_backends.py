"""Timing comparison of the compiled core against the pure Python fallback.

Runs each reduction on both backends with identical pre-normalized
inputs and prints best-of-k wall times plus the speedup. The compiled
column is skipped (with a note) when the extension is not built.

Usage:
    python3 benchmarks/bench_backends.py [--repeats 5] [--scale 1.0]
"""

import argparse
import timeit

import numpy as np

from depseries._accel import BACKEND, backend_module


def make_workloads(scale):
    rng = np.random.Generator(np.random.Philox(key=424242))

    n_sum = int(1_000_000 * scale)
    x = rng.standard_normal(n_sum)

    n_dense = int(768 * scale) or 2
    u = np.abs(rng.standard_normal(n_dense))
    g = rng.standard_normal((n_dense, n_dense))
    g = np.abs(g + g.T)

    n_lag = int(4096 * scale) or 4
    ul = np.abs(rng.standard_normal(n_lag))
    glag = 1.0 / (1.0 + np.arange(n_lag, dtype=np.float64)) ** 1.5
    idx = np.arange(1, n_lag + 1, dtype=np.int64)

    m_trig = int(4096 * scale) or 4
    pts = rng.random(int(64 * scale) or 2)
    a0 = 0.3 + 0.1j
    apos = (rng.standard_normal(m_trig) + 1j * rng.standard_normal(m_trig))
    apos /= 1.0 + np.arange(1, m_trig + 1) ** 1.1
    aneg = np.conj(apos) * 0.5
    marks = np.array(sorted({m_trig // 2**k for k in range(6)}), dtype=np.int64)

    return [
        ("comp_sum", f"n={n_sum}", lambda b: b.comp_sum(x)),
        ("bilinear_dense", f"n={n_dense}", lambda b: b.bilinear_dense(u, g)),
        ("bilinear_lagged", f"n={n_lag}, dense lags",
         lambda b: b.bilinear_lagged(ul, glag, idx)),
        ("trig_partial_sums", f"M={m_trig}, {pts.size} points",
         lambda b: b.trig_partial_sums(a0, apos, aneg, pts, marks)),
    ]


def best_time(fn, repeats):
    return min(timeit.repeat(fn, number=1, repeat=repeats))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5, help="best-of count")
    ap.add_argument("--scale", type=float, default=1.0,
                    help="scale factor for problem sizes")
    args = ap.parse_args()

    py = backend_module("python")
    try:
        comp = backend_module("compiled")
    except ImportError:
        comp = None

    print(f"active backend: {BACKEND}")
    if comp is None:
        print("compiled extension not built; timing the fallback only")
    header = f"{'reduction':<20} {'size':<22} {'python':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, size, call in make_workloads(args.scale):
        t_py = best_time(lambda: call(py), args.repeats)
        if comp is not None:
            t_c = best_time(lambda: call(comp), args.repeats)
            ratio = t_py / t_c if t_c > 0 else float("inf")
            print(f"{name:<20} {size:<22} {t_py:>10.4f} s {t_c:>10.4f} s {ratio:>8.1f}x")
        else:
            print(f"{name:<20} {size:<22} {t_py:>10.4f} s {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
