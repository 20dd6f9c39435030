"""L1-regularized least squares by cyclic coordinate descent."""

from __future__ import annotations

import math
import warnings

import numpy as np

from .. import _accel
from .types import FeatureSelection

TOL = 1e-7
MAX_CYCLES = 10_000
BISECT_STEPS = 60
LAMBDA_FLOOR = 1e-6


def standardize(X) -> np.ndarray:
    """Zero-mean, unit (population) variance columns; constant columns become 0."""
    X = np.asarray(X, dtype=float)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    Z = X - mu
    ok = sd > 1e-12 * np.maximum(1.0, np.abs(mu))
    Z[:, ok] /= sd[ok]
    Z[:, ~ok] = 0.0
    return Z


def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def _cd_loop(X, y, lam, beta, tol, max_cycles):
    m, p = X.shape
    resid = y - X @ beta
    norms = np.zeros(p)
    for j in range(p):
        s = 0.0
        for i in range(m):
            s += X[i, j] * X[i, j]
        norms[j] = s / m
    cycles = 0
    for _ in range(max_cycles):
        cycles += 1
        max_delta = 0.0
        for j in range(p):
            if norms[j] == 0.0:
                continue
            old = beta[j]
            rho = 0.0
            for i in range(m):
                rho += X[i, j] * resid[i]
            rho = rho / m + norms[j] * old
            z = rho - lam if rho > lam else (rho + lam if rho < -lam else 0.0)
            new = z / norms[j]
            d = new - old
            if d != 0.0:
                for i in range(m):
                    resid[i] -= X[i, j] * d
                beta[j] = new
                if abs(d) > max_delta:
                    max_delta = abs(d)
        if max_delta < tol:
            break
    return beta, cycles


_cd_nb = _accel.jit(_cd_loop)


def _cd_numpy(X, y, lam, beta, tol, max_cycles):
    m, p = X.shape
    resid = y - X @ beta
    norms = np.einsum("ij,ij->j", X, X) / m
    cols = np.asfortranarray(X)
    cycles = 0
    for _ in range(max_cycles):
        cycles += 1
        max_delta = 0.0
        for j in range(p):
            if norms[j] == 0.0:
                continue
            xj = cols[:, j]
            old = beta[j]
            rho = float(xj @ resid) / m + norms[j] * old
            new = _soft(rho, lam) / norms[j]
            d = new - old
            if d != 0.0:
                resid -= xj * d
                beta[j] = new
                max_delta = max(max_delta, abs(d))
        if max_delta < tol:
            break
    return beta, cycles


def _coordinate_descent(Z, y, lam, beta0=None, tol=TOL, max_cycles=MAX_CYCLES):
    beta = np.zeros(Z.shape[1]) if beta0 is None else np.array(beta0, dtype=float)
    core = _cd_nb if _accel.use_numba() else _cd_numpy
    return core(np.ascontiguousarray(Z), np.asarray(y, dtype=float), float(lam), beta,
                float(tol), int(max_cycles))


def lasso_fit(X, y, lam: float, *, standardized: bool = False, beta0=None,
              tol: float = TOL, max_cycles: int = MAX_CYCLES) -> np.ndarray:
    """Minimise (1/2m)||y - X b||^2 + lam ||b||_1 over b.

    Columns of ``X`` are standardized internally unless ``standardized`` is
    set; the coefficients refer to the standardized columns.  Labels given
    as {0, 1} are mapped to -1/+1.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    X = np.asarray(X, dtype=float)
    y = _pm1(y)
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("lasso inputs contain non-finite entries")
    Z = X if standardized else standardize(X)
    beta, _ = _coordinate_descent(Z, y, lam, beta0, tol, max_cycles)
    return beta


def _pm1(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if set(np.unique(y).tolist()) <= {0.0, 1.0}:
        return np.where(y == 1, 1.0, -1.0)
    return y


def lambda_max(Z, y) -> float:
    """Smallest lambda whose solution is all zero (for standardized Z)."""
    return float(np.max(np.abs(Z.T @ y)) / Z.shape[0])


def lasso_select_k(X, y, k: int, feature_ids=None) -> FeatureSelection:
    """Pick ``k`` features by bisecting lambda until k coefficients are non-zero.

    Bisection runs on log(lambda) between 1e-6 and lambda_max with warm
    starts.  If k is skipped along the path the closest count is kept and
    ``warning`` is set on the result.
    """
    X = np.asarray(X, dtype=float)
    y = _pm1(y)
    p = X.shape[1]
    if not 1 <= k < p:
        raise ValueError(f"k must satisfy 1 <= k < {p}")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("lasso inputs contain non-finite entries")
    Z = standardize(X)
    hi = lambda_max(Z, y)
    lo = min(LAMBDA_FLOOR, hi)
    beta_hi = np.zeros(p)
    best = (k, hi, beta_hi)  # (|count - k|, lambda, beta)
    for _ in range(BISECT_STEPS):
        mid = math.sqrt(lo * hi)
        beta = _coordinate_descent(Z, y, mid, beta_hi)[0]
        cnt = int(np.count_nonzero(beta))
        if abs(cnt - k) < best[0]:
            best = (abs(cnt - k), mid, beta)
        if cnt == k:
            break
        if cnt > k:
            lo = mid
        else:
            hi, beta_hi = mid, beta
    key, lam, beta = best
    sel = FeatureSelection.from_scores(np.flatnonzero(beta), np.abs(beta), "lasso", feature_ids)
    if key != 0:
        msg = f"lasso path skips k={k}; returning {len(sel.indices)} features"
        warnings.warn(msg)
        sel.warning = msg
    sel.params = {"k": int(k), "lambda": float(lam)}
    return sel
