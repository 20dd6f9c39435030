"""Quantum fidelity and linear Gram matrices."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import qsim

KINDS = ("quantum_zz", "quantum_pauli_z", "linear")


@dataclass
class KernelMatrix:
    values: np.ndarray
    kind: str
    row_ids: list
    col_ids: list

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.row_ids), len(self.col_ids)):
            raise ValueError("kernel shape does not match row/col ids")

    @property
    def is_square(self) -> bool:
        return list(self.row_ids) == list(self.col_ids)

    def min_eigenvalue(self) -> float:
        if not self.is_square:
            raise ValueError("eigenvalues need a square Gram matrix")
        return float(np.linalg.eigvalsh(self.values).min())


def _ids(ids, m):
    return [str(i) for i in (range(m) if ids is None else ids)]


def _states(A, map_kind, r):
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[None, :]
    return np.stack([qsim.feature_state(map_kind, row, r) for row in A]) if len(A) else \
        np.zeros((0, 1 << A.shape[1]), dtype=complex)


def fidelity(psi, phi) -> float:
    return float(abs(np.vdot(phi, psi)) ** 2)


def quantum_kernel_entry(x, y, map_kind: str = "zz", r: int = 2) -> float:
    """Squared overlap |<phi(y)|phi(x)>|^2 of the two encoded states."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return fidelity(qsim.feature_state(map_kind, x, r), qsim.feature_state(map_kind, y, r))


def gram_from_states(SA, SB=None) -> np.ndarray:
    if SB is None:
        ov = np.abs(SA.conj() @ SA.T) ** 2
        up = np.triu(ov)
        return up + np.triu(ov, 1).T
    return np.abs(SB.conj() @ SA.T).T ** 2


def quantum_kernel_matrix(A, B=None, map_kind: str = "zz", r: int = 2,
                          row_ids=None, col_ids=None) -> KernelMatrix:
    """Gram matrix K[i, j] = |<phi(B_j)|phi(A_i)>|^2.

    Each row's statevector is simulated once.  With ``B`` omitted (or the same
    object as ``A``) only the upper triangle is formed and then mirrored, so
    the result is exactly symmetric.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    same = B is None or B is A
    SA = _states(A, map_kind, r)
    kind = f"quantum_{map_kind}"
    if same:
        ids = _ids(row_ids, len(A))
        return KernelMatrix(gram_from_states(SA), kind, ids, ids)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"feature count mismatch: {A.shape[1]} vs {B.shape[1]}")
    SB = _states(B, map_kind, r)
    return KernelMatrix(gram_from_states(SA, SB), kind, _ids(row_ids, len(A)), _ids(col_ids, len(B)))


def linear_kernel(A, B=None, row_ids=None, col_ids=None) -> KernelMatrix:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if B is None or B is A:
        K = A @ A.T
        K = np.triu(K) + np.triu(K, 1).T
        ids = _ids(row_ids, len(A))
        return KernelMatrix(K, "linear", ids, ids)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"feature count mismatch: {A.shape[1]} vs {B.shape[1]}")
    return KernelMatrix(A @ B.T, "linear", _ids(row_ids, len(A)), _ids(col_ids, len(B)))


def compute_kernel(kind: str, A, B=None, r: int = 2, row_ids=None, col_ids=None) -> KernelMatrix:
    if kind in ("linear",):
        return linear_kernel(A, B, row_ids, col_ids)
    map_kind = kind.removeprefix("quantum_")
    return quantum_kernel_matrix(A, B, map_kind, r, row_ids, col_ids)


def check_psd(K: KernelMatrix, tol: float = 1e-8) -> bool:
    return K.min_eigenvalue() >= -tol


# -------------------------------------------------------------------- csv io

def write_kernel_csv(K: KernelMatrix, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{K.kind}", *K.col_ids])
        for rid, row in zip(K.row_ids, K.values):
            w.writerow([rid, *(repr(float(v)) for v in row)])


def read_kernel_csv(path) -> KernelMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path}: empty kernel file")
    kind, col_ids = rows[0][0], rows[0][1:]
    try:
        vals = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric kernel entry ({exc})") from None
    if vals.size == 0:
        vals = vals.reshape(len(rows) - 1, len(col_ids))
    return KernelMatrix(vals, kind, [r[0] for r in rows[1:]], col_ids)
