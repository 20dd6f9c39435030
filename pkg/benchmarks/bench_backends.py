"""Time the numba and pure-numpy backends on each accelerated kernel.

    python benchmarks/bench_backends.py [--repeat N]

Each case is run once per backend to warm up (numba compiles on first
call), then timed; the best of ``--repeat`` runs is reported along with a
check that both backends produced the same result.
"""

import argparse
import time

import numpy as np

from eqa_kernel import _accel, kernels, qsim, svm
from eqa_kernel.feature_select import AnnealSchedule, anneal, build_qubo, exhaustive_solve, lasso_fit


def _cases(rng):
    x10 = rng.uniform(0, np.pi, 10)
    X_kernel = rng.uniform(0, np.pi, (40, 6))

    y = rng.integers(0, 2, 60)
    X_q = rng.normal(size=(60, 200)) + 0.5 * y[:, None]
    q200 = build_qubo(X_q, y, 20)
    q18 = build_qubo(X_q[:, :18], y, 5)

    X_l = rng.normal(size=(72, 2000))
    y_l = rng.choice([-1.0, 1.0], 72)

    A = rng.normal(size=(300, 10))
    K = np.exp(-0.1 * ((A[:, None] - A[None]) ** 2).sum(-1))
    y_s = np.where(A[:, 0] + 0.3 * rng.normal(size=300) > 0, 1, 0)

    return {
        "simulate zz n=10 r=4": lambda: qsim.simulate(qsim.build_zz_feature_map(x10, 4)),
        "quantum gram 40x40 zz n=6": lambda: kernels.quantum_kernel_matrix(X_kernel, None, "zz", 2).values,
        "anneal n=200 (2000 sweeps x 2)": lambda: anneal(q200, AnnealSchedule(restarts=2))[1],
        "exhaustive n=18": lambda: exhaustive_solve(q18)[1],
        "lasso CD 72x2000": lambda: lasso_fit(X_l, y_l, 0.05),
        "SMO m=300": lambda: svm.smo_train(K, y_s, 1.0).alphas,
    }


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    cases = _cases(np.random.default_rng(0))
    prev = _accel.backend()
    print(f"{'case':34s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}  match")
    try:
        for name, fn in cases.items():
            res = {}
            for b in ("numba", "numpy"):
                _accel.set_backend(b)
                fn()  # warm-up / compile
                res[b] = _time(fn, args.repeat)
            (tn, on), (tp, op) = res["numba"], res["numpy"]
            match = np.allclose(on, op, rtol=1e-9, atol=1e-12)
            print(f"{name:34s} {tn:10.4f} {tp:10.4f} {tp / tn:7.1f}x  {'yes' if match else 'NO'}")
    finally:
        _accel.set_backend(prev)


if __name__ == "__main__":
    main()
