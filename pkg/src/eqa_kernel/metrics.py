"""Classification scores and the kernel/landscape comparison metrics."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class MetricSurface:
    """Metric values on a (feature count x sample count) grid."""

    feature_axis: list
    sample_axis: list
    values: np.ndarray
    metric_name: str = ""
    kernel_name: str = ""
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.feature_axis = [int(f) for f in self.feature_axis]
        self.sample_axis = [int(s) for s in self.sample_axis]
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.feature_axis), len(self.sample_axis)):
            raise ValueError(
                f"grid shape {self.values.shape} does not match axes "
                f"({len(self.feature_axis)}, {len(self.sample_axis)})"
            )

    @property
    def name(self) -> str:
        return "_".join(p for p in (self.metric_name, self.kernel_name) if p)

    def value_at(self, f: int, m: int) -> float:
        return float(self.values[self.feature_axis.index(f), self.sample_axis.index(m)])

    def to_dict(self) -> dict:
        return {
            "metric_name": self.metric_name,
            "kernel_name": self.kernel_name,
            "feature_axis": self.feature_axis,
            "sample_axis": self.sample_axis,
            "values": [[_json_float(v) for v in row] for row in self.values],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricSurface":
        vals = np.array([[np.nan if v is None else v for v in row] for row in d["values"]], dtype=float)
        return cls(d["feature_axis"], d["sample_axis"], vals,
                   d.get("metric_name", ""), d.get("kernel_name", ""))


def _json_float(v):
    v = float(v)
    return v if np.isfinite(v) else None


def write_surface_csv(s: MetricSurface, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature_count", "sample_count", "value"])
        for i, f in enumerate(s.feature_axis):
            for j, m in enumerate(s.sample_axis):
                w.writerow([f, m, repr(float(s.values[i, j]))])


def read_surface_csv(path, metric_name: str = "", kernel_name: str = "") -> MetricSurface:
    cells = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            cells[(int(row["feature_count"]), int(row["sample_count"]))] = float(row["value"])
    fa = sorted({f for f, _ in cells})
    sa = sorted({m for _, m in cells})
    vals = np.full((len(fa), len(sa)), np.nan)
    for (f, m), v in cells.items():
        vals[fa.index(f), sa.index(m)] = v
    if np.isnan(vals).any():
        raise ValueError(f"{path}: surface grid has missing cells")
    return MetricSurface(fa, sa, vals, metric_name, kernel_name)


def write_surface_json(s: MetricSurface, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(s.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ------------------------------------------------------------ classification

def _confusion(y_true, y_pred, positive=1):
    t = np.asarray(y_true)
    p = np.asarray(y_pred)
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.shape} vs {p.shape}")
    if t.size == 0:
        raise ValueError("empty label vectors")
    tp = int(np.sum((t == positive) & (p == positive)))
    fp = int(np.sum((t != positive) & (p == positive)))
    fn = int(np.sum((t == positive) & (p != positive)))
    tn = int(np.sum((t != positive) & (p != positive)))
    return tp, fp, fn, tn


def f1_score(y_true, y_pred, positive=1) -> float:
    tp, fp, fn, _ = _confusion(y_true, y_pred, positive)
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2 * tp / denom


def balanced_accuracy(y_true, y_pred, positive=1) -> float:
    tp, fp, fn, tn = _confusion(y_true, y_pred, positive)
    if tp + fn == 0 or tn + fp == 0:
        raise ValueError("balanced accuracy needs both classes in y_true")
    return 0.5 * (tp / (tp + fn) + tn / (tn + fp))


# ------------------------------------------------------- geometric difference

def _trace_normalize(K: np.ndarray) -> np.ndarray:
    tr = np.trace(K)
    if not tr > 0:
        raise ValueError("kernel trace must be positive")
    return K * (K.shape[0] / tr)


def _psd_sqrt(K: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(K)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def geometric_difference(k_classical, k_quantum, reg: float = 1e-7) -> float:
    """sqrt of the spectral norm of sqrt(KQ) (KC + reg I)^-1 sqrt(KQ).

    Both Gram matrices are symmetrized and rescaled to trace m first, which
    makes the value invariant to positive scaling of either input.
    """
    kc = np.asarray(getattr(k_classical, "values", k_classical), dtype=float)
    kq = np.asarray(getattr(k_quantum, "values", k_quantum), dtype=float)
    if kc.shape != kq.shape or kc.ndim != 2 or kc.shape[0] != kc.shape[1]:
        raise ValueError(f"need two square kernels of equal shape, got {kc.shape} and {kq.shape}")
    kc = _trace_normalize(0.5 * (kc + kc.T))
    kq = _trace_normalize(0.5 * (kq + kq.T))
    root = _psd_sqrt(kq)
    inner = root @ np.linalg.solve(kc + reg * np.eye(len(kc)), root)
    inner = 0.5 * (inner + inner.T)
    g = float(np.sqrt(max(np.linalg.eigvalsh(inner).max(), 0.0)))
    if not np.isfinite(g):
        raise ValueError("geometric difference is not finite")
    return g


# ------------------------------------------------------------------ ruggedness

_NEIGHBOURS = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)]


def tri_grid(values) -> np.ndarray:
    """Terrain ruggedness: sqrt of summed squared differences to the 8 neighbours.

    Cells on the border only use the neighbours that exist.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
        raise ValueError(f"grid too small for ruggedness (need >= 2x2, got {v.shape})")
    padded = np.pad(v, 1, constant_values=np.nan)
    rows, cols = v.shape
    acc = np.zeros_like(v)
    for di, dj in _NEIGHBOURS:
        nb = padded[1 + di:1 + di + rows, 1 + dj:1 + dj + cols]
        d = nb - v
        acc += np.where(np.isnan(d), 0.0, d * d)
    return np.sqrt(acc)


def tri_surface(surface: MetricSurface) -> MetricSurface:
    return MetricSurface(surface.feature_axis, surface.sample_axis, tri_grid(surface.values),
                         f"tri_{surface.metric_name}" if surface.metric_name else "tri",
                         surface.kernel_name)


def ptri_comparison(classical: MetricSurface, quantum: MetricSurface):
    """TRI of each landscape plus the quantum-minus-classical difference."""
    if classical.feature_axis != quantum.feature_axis or classical.sample_axis != quantum.sample_axis:
        raise ValueError("surfaces are defined on different axes")
    tc = tri_surface(classical)
    tq = tri_surface(quantum)
    diff = MetricSurface(tc.feature_axis, tc.sample_axis, tq.values - tc.values,
                         tq.metric_name, "quantum_minus_classical")
    return tc, tq, diff
