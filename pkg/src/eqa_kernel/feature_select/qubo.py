"""Relevance/redundancy QUBO for feature selection, plus two solvers.

:func:`anneal` is a single-bit-flip Metropolis annealer standing in for an
annealing device; :func:`exhaustive_solve` enumerates every state and is
the reference it is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _accel
from .lasso import standardize
from .types import FeatureSelection

EXHAUSTIVE_LIMIT = 24
# uniforms drawn per block of sweeps; bounds memory for large n
_BLOCK_DRAWS = 1 << 20


@dataclass
class QuboProblem:
    q: np.ndarray
    cardinality: int
    penalty_weight: float = 0.0
    redundancy_weight: float = 0.0
    relevance: np.ndarray = None

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        n = self.q.shape[0]
        if self.q.shape != (n, n):
            raise ValueError("QUBO matrix must be square")
        if _has_lower(self.q):
            raise ValueError("QUBO matrix must be upper triangular")
        if not 1 <= self.cardinality <= n:
            raise ValueError(f"cardinality must lie in [1, {n}]")

    @property
    def n(self) -> int:
        return self.q.shape[0]


def _has_lower(q) -> bool:
    return any(np.any(q[i, :i]) for i in range(1, q.shape[0]))


@dataclass(frozen=True)
class AnnealSchedule:
    t_start: float = 10.0
    t_end: float = 0.01
    sweeps: int = 2000
    restarts: int = 8
    seed: int = 0

    def __post_init__(self):
        if not self.t_start > self.t_end > 0:
            raise ValueError("need t_start > t_end > 0")
        if self.sweeps < 1 or self.restarts < 1:
            raise ValueError("sweeps and restarts must be >= 1")

    def temperatures(self) -> np.ndarray:
        if self.sweeps == 1:
            return np.array([self.t_start])
        return np.geomspace(self.t_start, self.t_end, self.sweeps)


def _relevance(Z, y):
    zy = standardize(np.asarray(y, dtype=float)[:, None])[:, 0]
    return np.clip(np.abs(Z.T @ zy) / Z.shape[0], 0.0, 1.0)


def _abs_corr(X, y):
    """|pearson| of each column with y and between columns; constant columns give 0."""
    Z = standardize(X)
    red = Z.T @ Z
    red /= Z.shape[0]
    np.abs(red, out=red)
    np.clip(red, 0.0, 1.0, out=red)
    return _relevance(Z, y), red


def qubo_from_correlations(relevance, redundancy, k: int, alpha: float = 0.5,
                           penalty_weight: float | None = None) -> QuboProblem:
    """Assemble the QUBO from |corr(feature, label)| and |corr(feature, feature)|.

    Diagonal: -r_iy + P (1 - 2k).  Upper triangle: alpha r_ij + 2P.  This is
    -sum r_iy x_i + alpha sum_{i<j} r_ij x_i x_j + P (sum x_i - k)^2 without
    the constant P k^2.  ``redundancy`` is consumed in place when it is a
    float array.
    """
    rel = np.asarray(relevance, dtype=float)
    q = np.asarray(redundancy, dtype=float)
    n = rel.size
    if q.shape != (n, n):
        raise ValueError("redundancy matrix does not match relevance vector")
    if k < 1:
        raise ValueError("k must be >= 1")
    if penalty_weight is None:
        penalty_weight = 2.0 * float(rel.max()) if n else 0.0
    if alpha < 0 or penalty_weight < 0:
        raise ValueError("alpha and penalty_weight must be non-negative")
    q *= alpha
    q += 2.0 * penalty_weight
    for i in range(n):
        q[i, :i] = 0.0
    q[np.diag_indices(n)] = -rel + penalty_weight * (1 - 2 * k)
    return QuboProblem(q, int(min(k, n)) if n else 1, float(penalty_weight), float(alpha), rel)


def build_qubo(X, y, k: int, alpha: float = 0.5, penalty_weight: float | None = None) -> QuboProblem:
    """Relevance/redundancy QUBO from absolute Pearson correlations.

    ``penalty_weight`` defaults to twice the largest relevance; zero-variance
    features get zero correlation with everything.
    """
    rel, red = _abs_corr(np.asarray(X, dtype=float), y)
    return qubo_from_correlations(rel, red, k, alpha, penalty_weight)


def qubo_energy(p: QuboProblem, bits) -> float:
    b = np.asarray(bits).astype(bool).ravel()
    if b.size != p.n:
        raise ValueError(f"bit vector has length {b.size}, problem has {p.n} variables")
    s = np.flatnonzero(b)
    return float(p.q[np.ix_(s, s)].sum())


# --------------------------------------------------------------- annealing

def _sweep_block(W, diag, x, h, energy, best_x, best_e, temps, u):
    n = x.size
    for s in range(temps.size):
        t = temps[s]
        for i in range(n):
            delta = h[i] if x[i] == 0 else -h[i]
            if delta <= 0.0 or u[s, i] < np.exp(-delta / t):
                step = 1.0 if x[i] == 0 else -1.0
                x[i] = 1 - x[i]
                energy += delta
                for j in range(n):
                    h[j] += W[i, j] * step
                if energy < best_e:
                    best_e = energy
                    for j in range(n):
                        best_x[j] = x[j]
    return energy, best_e


_sweep_block_nb = _accel.jit(_sweep_block)


def _sweep_block_numpy(W, diag, x, h, energy, best_x, best_e, temps, u):
    n = x.size
    for s in range(temps.size):
        t = temps[s]
        for i in range(n):
            delta = h[i] if x[i] == 0 else -h[i]
            if delta <= 0.0 or u[s, i] < np.exp(-delta / t):
                step = 1.0 if x[i] == 0 else -1.0
                x[i] = 1 - x[i]
                energy += delta
                h += W[i] * step
                if energy < best_e:
                    best_e = energy
                    best_x[:] = x
    return energy, best_e


def _symmetric_couplings(q):
    W = q + q.T
    W[np.diag_indices(q.shape[0])] = 0.0
    return W


def _anneal_restart(W, diag, temps, rng):
    n = diag.size
    x = (rng.random(n) < 0.5).astype(np.int64)
    h = diag + W @ x
    energy = float(diag @ x + 0.5 * x @ W @ x)
    best_x = x.copy()
    best_e = energy
    block = max(1, _BLOCK_DRAWS // max(n, 1))
    core = _sweep_block_nb if _accel.use_numba() else _sweep_block_numpy
    for start in range(0, temps.size, block):
        tb = temps[start:start + block]
        u = rng.random((tb.size, n))
        energy, best_e = core(W, diag, x, h, energy, best_x, best_e, tb, u)
    return best_x


def anneal(p: QuboProblem, schedule: AnnealSchedule = AnnealSchedule()):
    """Simulated annealing, best state over all restarts.

    Restart ``r`` draws from ``default_rng([seed, r])``.  The returned energy
    is recomputed from the returned bits with :func:`qubo_energy`.
    """
    n = p.n
    W = _symmetric_couplings(p.q)
    diag = np.ascontiguousarray(np.diag(p.q))
    temps = schedule.temperatures()
    best_bits, best_e = None, np.inf
    for r in range(schedule.restarts):
        rng = np.random.default_rng([schedule.seed, r])
        bits = _anneal_restart(W, diag, temps, rng)
        e = qubo_energy(p, bits)
        if e < best_e:
            best_bits, best_e = bits, e
    if n == 0:
        return np.zeros(0, dtype=np.int64), 0.0
    return best_bits.astype(np.int64), best_e


# -------------------------------------------------------------- enumeration

def _gray_loop(W, diag, tol):
    n = diag.size
    x = np.zeros(n, dtype=np.int64)
    h = diag.copy()
    energy = 0.0
    best_e = 0.0
    best_v = 0
    v = 0
    for g in range(1, 1 << n):
        i = 0
        while not (g >> i) & 1:
            i += 1
        delta = h[i] if x[i] == 0 else -h[i]
        step = 1.0 if x[i] == 0 else -1.0
        x[i] = 1 - x[i]
        v ^= 1 << i
        energy += delta
        for j in range(n):
            h[j] += W[i, j] * step
        if energy < best_e - tol:
            best_e = energy
            best_v = v
        elif energy <= best_e + tol and v < best_v:
            best_v = v
    return best_v


_gray_nb = _accel.jit(_gray_loop)


def _enumerate_numpy(q, tol, chunk=1 << 16):
    n = q.shape[0]
    shifts = np.arange(n, dtype=np.int64)
    best_e, best_v = 0.0, 0
    for start in range(0, 1 << n, chunk):
        ints = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        B = ((ints[:, None] >> shifts) & 1).astype(float)
        E = np.einsum("si,si->s", B @ q, B)
        emin = E.min()
        if emin < best_e - tol:
            best_e = emin
            best_v = int(ints[np.flatnonzero(E <= emin + tol)[0]])
        else:
            hit = np.flatnonzero(E <= best_e + tol)
            if hit.size and ints[hit[0]] < best_v:
                best_v = int(ints[hit[0]])
    return best_v


def exhaustive_solve(p: QuboProblem):
    """Global minimum by enumerating all 2^n states.

    Ties (within 1e-12 relative) go to the state with the smallest integer
    value sum(bits[i] << i).
    """
    n = p.n
    if n > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive enumeration refused for n={n} > {EXHAUSTIVE_LIMIT}")
    tol = 1e-12 * max(1.0, float(np.abs(p.q).sum()))
    if _accel.use_numba():
        v = _gray_nb(_symmetric_couplings(p.q), np.ascontiguousarray(np.diag(p.q)), tol)
    else:
        v = _enumerate_numpy(p.q, tol)
    bits = np.array([(v >> i) & 1 for i in range(n)], dtype=np.int64)
    return bits, qubo_energy(p, bits)


# ---------------------------------------------------------------- selection

def qubo_select_k(X, y, k: int, schedule: AnnealSchedule = AnnealSchedule(),
                  alpha: float = 0.5, penalty_weight: float | None = None,
                  candidates: int | None = None, feature_ids=None) -> FeatureSelection:
    """Select ``k`` features by annealing the relevance/redundancy QUBO.

    ``candidates`` optionally restricts the QUBO to the most relevant columns
    before annealing, which keeps the coupling matrix small on wide data.
    When the annealed state does not hold exactly ``k`` bits, the most
    relevant selected features are kept, or the most relevant unselected
    ones are added.
    """
    X = np.asarray(X, dtype=float)
    n_all = X.shape[1]
    if not 1 <= k <= n_all:
        raise ValueError(f"k must satisfy 1 <= k <= {n_all}")
    pool = np.arange(n_all)
    if candidates is not None and candidates < n_all:
        rel_all = _relevance(standardize(X), y)
        pool = np.sort(np.lexsort((np.arange(n_all), -rel_all))[: max(candidates, k)])
    p = build_qubo(X[:, pool], y, k, alpha, penalty_weight)
    bits, energy = anneal(p, schedule)
    rel = p.relevance
    chosen = np.flatnonzero(bits)
    order = lambda idx: idx[np.lexsort((idx, -rel[idx]))]
    chosen = order(chosen)
    if chosen.size > k:
        chosen = chosen[:k]
    elif chosen.size < k:
        rest = order(np.setdiff1d(np.arange(p.n), chosen))
        chosen = np.concatenate([chosen, rest[: k - chosen.size]])
    full_rel = np.zeros(n_all)
    full_rel[pool] = rel
    sel = FeatureSelection.from_scores(pool[chosen], full_rel, "qubo", feature_ids)
    sel.params = {
        "k": int(k), "alpha": float(alpha), "penalty_weight": p.penalty_weight,
        "energy": float(energy), "annealed_count": int(bits.sum()),
        "candidates": None if candidates is None else int(candidates),
        "t_start": schedule.t_start, "t_end": schedule.t_end, "sweeps": schedule.sweeps,
        "restarts": schedule.restarts, "seed": schedule.seed,
    }
    return sel

