"""Time the JIT and pure-numpy kernel backends side by side.

Usage:
    python benchmarks/bench_kernels.py [--reps 50000] [--fit-reps 2000]

Workloads mirror the Monte Carlo experiments: batched profile scores for
the three models, triangular-residual term scores, and the per-replicate
maximum-likelihood fit of the full-covariance model.
"""

import argparse
import time

import numpy as np

from parseries import Ar1Model, gamma_of, make_projector, sample_gaussian_stack
from parseries._kernels import numpy_impl

try:
    from parseries._kernels import numba_impl
except ImportError:
    numba_impl = None

from parseries.likelihood import BETA_EDGE


def _time(fun, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fun()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=50_000)
    parser.add_argument("--fit-reps", type=int, default=2_000)
    args = parser.parse_args()

    n, k, beta = 8, 4, 0.4
    bundle = gamma_of(Ar1Model(n), beta)
    y = sample_gaussian_stack(n, k, bundle.gamma, np.eye(k), 1, args.reps)
    x = np.ones((n, 1))
    proj = make_projector(bundle.w, x)
    a_mat = proj.wq @ bundle.d @ proj.wq
    tr_pd = float(np.trace(proj.wq @ bundle.d))
    pts = Ar1Model(n).points
    y_fit = y[: args.fit_reps]
    lo, hi = -1.0 + BETA_EDGE, 1.0 - BETA_EDGE

    workloads = [
        (
            f"scores model I   ({args.reps} reps, n={n}, k={k})",
            lambda impl: impl.batch_scores(y, proj.wq, a_mat, tr_pd, proj.rank, 1),
        ),
        (
            f"scores model II  ({args.reps} reps, n={n}, k={k})",
            lambda impl: impl.batch_scores(y, proj.wq, a_mat, tr_pd, proj.rank, 2),
        ),
        (
            f"scores model III ({args.reps} reps, n={n}, k={k})",
            lambda impl: impl.batch_scores(y, proj.wq, a_mat, tr_pd, proj.rank, 3),
        ),
        (
            f"triangular terms ({args.reps} reps, n={n}, {n - 1} terms)",
            lambda impl: impl.batch_ut_term_scores(y, x, bundle.w, bundle.d, min(k, n - 1)),
        ),
        (
            f"fit model III    ({args.fit_reps} reps, n={n}, k={k})",
            lambda impl: impl.batch_fit_model_iii(y_fit, pts, lo, hi, 1e-8),
        ),
    ]

    impls = [("numpy", numpy_impl)]
    if numba_impl is not None:
        for _, work in workloads:
            work(numba_impl)  # trigger compilation outside the timings
        impls.append(("numba", numba_impl))
    else:
        print("numba unavailable; timing the numpy backend only")

    width = max(len(name) for name, _ in workloads)
    header = f"{'workload':<{width}}  " + "".join(f"{name:>12}" for name, _ in impls)
    if len(impls) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, work in workloads:
        times = [_time(lambda impl=impl: work(impl)) for _, impl in impls]
        line = f"{name:<{width}}  " + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>9.1f}x"
        print(line)

    if len(impls) == 2:
        a = numpy_impl.batch_scores(y, proj.wq, a_mat, tr_pd, proj.rank, 3)
        b = numba_impl.batch_scores(y, proj.wq, a_mat, tr_pd, proj.rank, 3)
        print(f"\nbackend agreement (model III scores): max abs diff {np.max(np.abs(a - b)):.2e}")


if __name__ == "__main__":
    main()
