"""Expression data ingestion, normalization, scaling and splitting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

LABEL_NAMES = {"ALL": 0, "AML": 1, "0": 0, "1": 1}


class IngestionError(ValueError):
    """Raised when an input file cannot be turned into a dataset."""


class SplitError(ValueError):
    """Raised when a split or subsample cannot honour stratification."""


@dataclass
class ExpressionDataset:
    values: np.ndarray
    feature_ids: list[str]
    labels: np.ndarray
    sample_ids: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.feature_ids = [str(f) for f in self.feature_ids]
        self.sample_ids = [str(s) for s in self.sample_ids]
        if self.values.ndim != 2:
            raise ValueError("values must be a samples x features matrix")
        m, n = self.values.shape
        if not (m == len(self.labels) == len(self.sample_ids)):
            raise ValueError("row count, labels and sample_ids disagree")
        if n != len(self.feature_ids):
            raise ValueError("column count and feature_ids disagree")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 (ALL) or 1 (AML)")
        if len(set(self.feature_ids)) != n:
            raise ValueError("feature_ids must be unique")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def take_rows(self, idx) -> "ExpressionDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return ExpressionDataset(
            self.values[idx], self.feature_ids, self.labels[idx],
            [self.sample_ids[i] for i in idx],
        )

    def take_features(self, idx) -> "ExpressionDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return ExpressionDataset(
            self.values[:, idx], [self.feature_ids[i] for i in idx],
            self.labels, self.sample_ids,
        )

    def with_values(self, values) -> "ExpressionDataset":
        return ExpressionDataset(values, self.feature_ids, self.labels, self.sample_ids)


@dataclass
class ScalingParams:
    per_feature_min: np.ndarray
    per_feature_max: np.ndarray
    target_lo: float = 0.0
    target_hi: float = math.pi
    degenerate: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.per_feature_min = np.asarray(self.per_feature_min, dtype=float)
        self.per_feature_max = np.asarray(self.per_feature_max, dtype=float)
        if self.per_feature_min.shape != self.per_feature_max.shape:
            raise ValueError("min/max vectors differ in length")
        if np.any(self.per_feature_min > self.per_feature_max):
            raise ValueError("per_feature_min exceeds per_feature_max")
        if not self.target_lo < self.target_hi:
            raise ValueError("target_lo must be below target_hi")
        self.degenerate = self.per_feature_min == self.per_feature_max


# ---------------------------------------------------------------- ingestion

def _parse_float(cell: str, row: int, col: str, path) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise IngestionError(
            f"{path}: non-numeric expression value {cell!r} at row {row}, column {col!r}"
        ) from None
    if not math.isfinite(v):
        raise IngestionError(f"{path}: non-finite value at row {row}, column {col!r}")
    return v


def _parse_label(cell: str, where: str) -> int:
    key = cell.strip().upper()
    if key not in LABEL_NAMES:
        raise IngestionError(f"{where}: unrecognised label {cell!r} (expected 0/1 or ALL/AML)")
    return LABEL_NAMES[key]


def read_label_file(path) -> dict[str, int]:
    """Read a ``sample_id,label`` CSV (a header row is optional).

    A tidy dataset CSV is also accepted; its first and last columns are used.
    """
    out: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise IngestionError(f"{path}: empty label file")
    start = 0
    try:
        _parse_label(rows[0][-1], "")
    except IngestionError:
        start = 1  # header
    for r, row in enumerate(rows[start:], start=start + 1):
        if not row:
            continue
        out[row[0].strip()] = _parse_label(row[-1], f"{path} row {r}")
    return out


def _load_golub_wide(path, labels: dict[str, int]):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    try:
        acc_col = header.index("Gene Accession Number")
    except ValueError:
        raise IngestionError(f"{path}: no 'Gene Accession Number' column") from None
    sample_cols = [
        j for j, h in enumerate(header)
        if j != acc_col and h != "Gene Description" and not h.strip().lower().startswith("call")
    ]
    sample_ids = [header[j].strip() for j in sample_cols]
    feature_ids, seen = [], set()
    values = np.empty((len(sample_cols), len(rows)))
    for r, row in enumerate(rows):
        gid = row[acc_col].strip()
        if gid in seen:
            raise IngestionError(f"{path}: duplicate feature id {gid!r}")
        seen.add(gid)
        feature_ids.append(gid)
        for s, j in enumerate(sample_cols):
            values[s, r] = _parse_float(row[j], r + 2, header[j], path)
    missing = [s for s in sample_ids if s not in labels]
    if missing:
        raise IngestionError(f"{path}: no label for sample(s) {missing}")
    y = np.array([labels[s] for s in sample_ids], dtype=np.int64)
    return values, feature_ids, y, sample_ids


def _load_tidy(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader if row]
    has_ids = header[0].strip().lower() in ("sample_id", "sample", "id")
    feat_cols = header[1:-1] if has_ids else header[:-1]
    off = 1 if has_ids else 0
    if len(set(feat_cols)) != len(feat_cols):
        dup = sorted({f for f in feat_cols if feat_cols.count(f) > 1})
        raise IngestionError(f"{path}: duplicate feature id(s) {dup}")
    values = np.empty((len(rows), len(feat_cols)))
    labels = np.empty(len(rows), dtype=np.int64)
    sample_ids = []
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise IngestionError(f"{path}: row {r + 2} has {len(row)} cells, expected {len(header)}")
        sample_ids.append(row[0].strip() if has_ids else f"s{r}")
        for j, col in enumerate(feat_cols):
            values[r, j] = _parse_float(row[j + off], r + 2, col, path)
        labels[r] = _parse_label(row[-1], f"{path} row {r + 2}, column {header[-1]!r}")
    return values, [f.strip() for f in feat_cols], labels, sample_ids


def load_expression_csv(path, format: str = "tidy", labels_path=None) -> ExpressionDataset:
    """Load an expression matrix as a samples x features dataset.

    Parameters
    ----------
    path : path or sequence of paths
        One file, or several files of the same layout whose samples are
        concatenated (e.g. the Golub train and test files).
    format : {"golub-wide", "tidy"}
        ``golub-wide`` has genes as rows, a "Gene Accession Number" column and
        per-sample value columns interleaved with "call" columns; labels come
        from ``labels_path``.  ``tidy`` has samples as rows, feature ids in the
        header (optionally preceded by a ``sample_id`` column) and the label
        in the final column.
    labels_path : path, optional
        Companion ``sample_id,label`` file, required for ``golub-wide``.
    """
    paths = [path] if isinstance(path, (str, Path)) else list(path)
    if format == "golub-wide":
        if labels_path is None:
            raise IngestionError("golub-wide format needs a label file")
        labels = read_label_file(labels_path)
        parts = [_load_golub_wide(p, labels) for p in paths]
    elif format == "tidy":
        parts = [_load_tidy(p) for p in paths]
    else:
        raise ValueError(f"unknown format {format!r}")
    fids = parts[0][1]
    for p in parts[1:]:
        if p[1] != fids:
            raise IngestionError("input files disagree on feature ids / order")
    sids = [s for p in parts for s in p[3]]
    if len(set(sids)) != len(sids):
        raise IngestionError("duplicate sample ids across input files")
    return ExpressionDataset(
        np.vstack([p[0] for p in parts]), fids,
        np.concatenate([p[2] for p in parts]), sids,
    )


def write_tidy_csv(ds: ExpressionDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_id", *ds.feature_ids, "label"])
        for sid, row, lab in zip(ds.sample_ids, ds.values, ds.labels):
            w.writerow([sid, *(repr(float(v)) for v in row), int(lab)])


# ------------------------------------------------------------ preprocessing

def quantile_normalize(values) -> np.ndarray:
    """Map every sample (row) onto the mean empirical distribution.

    Rank k in each row receives the mean over rows of the k-th order
    statistic.  Tied values within a row share the average of the rank means
    of the positions they occupy.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 2 or x.size == 0:
        raise ValueError("quantile_normalize needs a non-empty 2-D matrix")
    order = np.argsort(x, axis=1, kind="stable")
    sorted_x = np.take_along_axis(x, order, axis=1)
    rank_means = sorted_x.mean(axis=0)
    out = np.empty_like(x)
    cums = np.concatenate(([0.0], np.cumsum(rank_means)))
    for i in range(x.shape[0]):
        row = sorted_x[i]
        # tie groups: starts of runs of equal sorted values
        starts = np.flatnonzero(np.concatenate(([True], row[1:] != row[:-1])))
        ends = np.append(starts[1:], row.size)
        group_mean = (cums[ends] - cums[starts]) / (ends - starts)
        vals = np.repeat(group_mean, ends - starts)
        out[i, order[i]] = vals
    return out


def fit_minmax(train_values, target_lo: float = 0.0, target_hi: float = math.pi) -> ScalingParams:
    x = np.asarray(train_values, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("fit_minmax needs a non-empty samples x features matrix")
    return ScalingParams(x.min(axis=0), x.max(axis=0), float(target_lo), float(target_hi))


def apply_minmax(values, params: ScalingParams) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.per_feature_min.size:
        raise ValueError(
            f"expected {params.per_feature_min.size} columns, got shape {x.shape}"
        )
    lo, hi = params.target_lo, params.target_hi
    span = params.per_feature_max - params.per_feature_min
    safe = np.where(params.degenerate, 1.0, span)
    out = lo + (x - params.per_feature_min) / safe * (hi - lo)
    out = np.clip(out, lo, hi)
    out[:, params.degenerate] = 0.5 * (lo + hi)
    return out


# ---------------------------------------------------------------- splitting

def _allocate(class_sizes: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder allocation of ``total`` slots proportional to class sizes."""
    quota = class_sizes * total / class_sizes.sum()
    alloc = np.floor(quota).astype(np.int64)
    rem = quota - alloc
    for c in np.argsort(-rem, kind="stable")[: total - alloc.sum()]:
        alloc[c] += 1
    return alloc


def _class_positions(labels: np.ndarray):
    return [np.flatnonzero(labels == c) for c in (0, 1)]


def train_test_split(ds: ExpressionDataset, test_fraction: float = 0.2, seed: int = 0):
    """Stratified, seeded split into (train, test).

    The test part holds ``ceil(test_fraction * m)`` samples, so 72 samples at
    0.2 give 57 training and 15 test samples.  Row order inside each part
    follows the original dataset order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise SplitError("test_fraction must lie strictly between 0 and 1")
    train_idx, test_idx = split_indices(ds.labels, test_fraction, seed)
    return ds.take_rows(train_idx), ds.take_rows(test_idx)


def split_indices(labels, test_fraction: float, seed: int):
    labels = np.asarray(labels)
    m = labels.size
    groups = _class_positions(labels)
    sizes = np.array([g.size for g in groups])
    if (sizes < 2).any():
        raise SplitError(f"each class needs at least 2 samples, got counts {sizes.tolist()}")
    n_test = int(math.ceil(test_fraction * m - 1e-9))
    n_test = min(max(n_test, 2), m - 2)
    alloc = _allocate(sizes, n_test)
    # keep at least one of each class on both sides
    alloc = np.clip(alloc, 1, sizes - 1)
    while alloc.sum() > n_test:
        alloc[np.argmax(alloc)] -= 1
    while alloc.sum() < n_test:
        alloc[np.argmax(sizes - alloc)] += 1
    rng = np.random.default_rng(seed)
    test = np.concatenate([rng.permutation(g)[:a] for g, a in zip(groups, alloc)])
    mask = np.zeros(m, dtype=bool)
    mask[test] = True
    return np.flatnonzero(~mask), np.flatnonzero(mask)


def subsample_indices(labels, m: int, seed: int) -> np.ndarray:
    labels = np.asarray(labels)
    total = labels.size
    if m < 2:
        raise SplitError("subsample size must be at least 2")
    if m > total:
        raise SplitError(f"subsample size {m} exceeds {total} available samples")
    groups = _class_positions(labels)
    sizes = np.array([g.size for g in groups])
    if (sizes == 0).any():
        raise SplitError("both classes must be present before subsampling")
    if m == total:
        return np.arange(total)
    alloc = np.minimum(np.maximum(_allocate(sizes, m), 1), sizes)
    while alloc.sum() > m:
        alloc[np.argmax(alloc)] -= 1
    while alloc.sum() < m:
        alloc[np.argmax(sizes - alloc)] += 1
    rng = np.random.default_rng(seed)
    picked = np.concatenate([rng.permutation(g)[:a] for g, a in zip(groups, alloc)])
    return np.sort(picked)


def stratified_subsample(ds: ExpressionDataset, m: int, seed: int = 0) -> ExpressionDataset:
    """Draw ``m`` samples keeping the class ratio as close as rounding allows."""
    return ds.take_rows(subsample_indices(ds.labels, m, seed))


def preprocess(ds: ExpressionDataset, quantile: bool = True) -> ExpressionDataset:
    return ds.with_values(quantile_normalize(ds.values)) if quantile else ds


def labels_pm1(labels: Sequence[int]) -> np.ndarray:
    return np.where(np.asarray(labels) == 1, 1.0, -1.0)
