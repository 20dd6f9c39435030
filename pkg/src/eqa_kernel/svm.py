"""Binary soft-margin SVM on precomputed kernels, trained by SMO."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _accel

TAU = 1e-12


@dataclass
class SvmModel:
    alphas: np.ndarray
    bias: float
    support_indices: list
    labels: np.ndarray  # +-1
    c: float
    n_iter: int = 0
    converged: bool = True
    objective_history: np.ndarray = field(default=None, repr=False)

    def dual_objective(self, K) -> float:
        return dual_objective(self.alphas, np.asarray(K, dtype=float), self.labels)

    def to_dict(self) -> dict:
        return {
            "alphas": [float(a) for a in self.alphas],
            "bias": float(self.bias),
            "support_indices": [int(i) for i in self.support_indices],
            "labels": [int(v) for v in self.labels],
            "c": float(self.c),
            "n_iter": int(self.n_iter),
            "converged": bool(self.converged),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        return cls(np.array(d["alphas"], dtype=float), float(d["bias"]), list(d["support_indices"]),
                   np.array(d["labels"], dtype=float), float(d["c"]), d.get("n_iter", 0),
                   d.get("converged", True))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def dual_objective(alphas, K, y) -> float:
    """sum(alpha) - 1/2 alpha^T Q alpha with Q_ij = y_i y_j K_ij."""
    ay = alphas * y
    return float(alphas.sum() - 0.5 * ay @ K @ ay)


def _select_loop(alpha, G, K, y, c):
    m = alpha.size
    i = -1
    gmax = -np.inf
    for t in range(m):
        if (y[t] > 0 and alpha[t] < c) or (y[t] < 0 and alpha[t] > 0):
            v = -y[t] * G[t]
            if v > gmax:
                gmax = v
                i = t
    j = -1
    gmin = np.inf
    best = np.inf
    for t in range(m):
        if (y[t] < 0 and alpha[t] < c) or (y[t] > 0 and alpha[t] > 0):
            v = -y[t] * G[t]
            if v < gmin:
                gmin = v
            if i >= 0 and v < gmax:
                b = gmax - v
                a = K[i, i] + K[t, t] - 2.0 * K[i, t]
                if a <= 0:
                    a = TAU
                score = -(b * b) / a
                if score < best:
                    best = score
                    j = t
    return i, j, gmax, gmin


def _smo_loop(K, y, c, tol, max_iter):
    m = y.size
    alpha = np.zeros(m)
    G = -np.ones(m)
    hist = np.zeros(max_iter + 1)
    it = 0
    while it < max_iter:
        i, j, gmax, gmin = _select_loop_nb(alpha, G, K, y, c)
        if j < 0 or gmax - gmin < tol:
            break
        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if a <= 0:
            a = TAU
        step = (gmax + y[j] * G[j]) / a
        cap_i = c - alpha[i] if y[i] > 0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0 else c - alpha[j]
        step = min(step, cap_i, cap_j)
        di = y[i] * step
        dj = -y[j] * step
        alpha[i] += di
        alpha[j] -= y[j] * step
        # snap to the box to avoid drift past the bounds
        for t in (i, j):
            if alpha[t] < 1e-14 * c:
                alpha[t] = 0.0
            elif alpha[t] > c * (1 - 1e-14):
                alpha[t] = c
        for t in range(m):
            G[t] += y[t] * (y[i] * K[t, i] * di + y[j] * K[t, j] * dj)
        it += 1
        s = 0.0
        for t in range(m):
            s += alpha[t] * (G[t] - 1.0)
        hist[it] = -0.5 * s
    return alpha, G, it, hist[: it + 1]


_select_loop_nb = _accel.jit(_select_loop)
_smo_nb = _accel.jit(_smo_loop)


def _smo_numpy(K, y, c, tol, max_iter):
    m = y.size
    alpha = np.zeros(m)
    G = -np.ones(m)
    hist = [0.0]
    diagK = np.diag(K)
    it = 0
    while it < max_iter:
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < c)) | ((y > 0) & (alpha > 0))
        v = -y * G
        if not up.any() or not low.any():
            break
        i = int(np.argmax(np.where(up, v, -np.inf)))
        gmax = v[i]
        gmin = np.min(np.where(low, v, np.inf))
        if gmax - gmin < tol:
            break
        cand = low & (v < gmax)
        if not cand.any():
            break
        a_all = diagK[i] + diagK - 2.0 * K[i]
        a_all = np.where(a_all <= 0, TAU, a_all)
        b_all = gmax - v
        score = np.where(cand, -(b_all * b_all) / a_all, np.inf)
        j = int(np.argmin(score))
        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if a <= 0:
            a = TAU
        step = (gmax + y[j] * G[j]) / a
        cap_i = c - alpha[i] if y[i] > 0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0 else c - alpha[j]
        step = min(step, cap_i, cap_j)
        di = y[i] * step
        dj = -y[j] * step
        alpha[i] += di
        alpha[j] -= y[j] * step
        for t in (i, j):
            if alpha[t] < 1e-14 * c:
                alpha[t] = 0.0
            elif alpha[t] > c * (1 - 1e-14):
                alpha[t] = c
        G += y * (y[i] * K[:, i] * di + y[j] * K[:, j] * dj)
        it += 1
        hist.append(-0.5 * float(np.sum(alpha * (G - 1.0))))
    return alpha, G, it, np.array(hist)


def _bias(alpha, G, y, c):
    r = -y * G
    free = (alpha > 0) & (alpha < c)
    if free.any():
        return float(r[free].mean())
    lower = ((alpha <= 0) & (y > 0)) | ((alpha >= c) & (y < 0))
    upper = ((alpha <= 0) & (y < 0)) | ((alpha >= c) & (y > 0))
    lo = r[lower].max() if lower.any() else -np.inf
    hi = r[upper].min() if upper.any() else np.inf
    if np.isfinite(lo) and np.isfinite(hi):
        return float(0.5 * (lo + hi))
    return float(lo if np.isfinite(lo) else hi)


def to_pm1(labels) -> np.ndarray:
    lab = np.asarray(labels)
    if set(np.unique(lab).tolist()) <= {0, 1}:
        return np.where(lab == 1, 1.0, -1.0)
    return lab.astype(float)


def smo_train(K, y, c: float = 1.0, tol: float = 1e-3, max_iter: int = 100_000) -> SvmModel:
    """Solve the soft-margin dual by SMO with second-order working-set selection.

    ``y`` may be given as {0, 1} (1 is the positive class) or as +-1.
    """
    K = np.asarray(getattr(K, "values", K), dtype=float)
    y = to_pm1(y)
    m = y.size
    if K.shape != (m, m):
        raise ValueError(f"kernel shape {K.shape} does not match {m} labels")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("labels must be +-1 or 0/1")
    if not ((y > 0).any() and (y < 0).any()):
        raise ValueError("training labels contain a single class")
    if c <= 0:
        raise ValueError("c must be positive")
    K = 0.5 * (K + K.T)
    lam_min = float(np.linalg.eigvalsh(K).min())
    if lam_min < -1e-6:
        raise ValueError(f"kernel is not positive semidefinite (min eigenvalue {lam_min:.3g})")
    core = _smo_nb if _accel.use_numba() else _smo_numpy
    alpha, G, it, hist = core(K, y, float(c), float(tol), int(max_iter))
    converged = it < max_iter
    if not converged:
        warnings.warn(f"SMO stopped after {max_iter} iterations without meeting tol={tol}")
    support = np.flatnonzero(alpha > 0).tolist()
    return SvmModel(alpha, _bias(alpha, G, y, c), support, y, float(c), int(it), converged, hist)


def decision_function(model: SvmModel, K_cross) -> np.ndarray:
    Kx = np.asarray(getattr(K_cross, "values", K_cross), dtype=float)
    if Kx.ndim != 2:
        Kx = Kx.reshape(0, model.alphas.size) if Kx.size == 0 else np.atleast_2d(Kx)
    if Kx.shape[1] != model.alphas.size:
        raise ValueError(f"cross kernel has {Kx.shape[1]} columns, model has {model.alphas.size} training points")
    return Kx @ (model.alphas * model.labels) + model.bias


def predict(model: SvmModel, K_cross):
    """Return (labels in {0, 1}, decision values); f == 0 goes to class 1."""
    f = decision_function(model, K_cross)
    return (f >= 0).astype(np.int64), f
