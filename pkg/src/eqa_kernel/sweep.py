"""Configuration-grid experiment: selection, scaling, kernels, SVMs, metrics."""

from __future__ import annotations

import json
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .data import ExpressionDataset, apply_minmax, fit_minmax, split_indices, subsample_indices
from .feature_select import AnnealSchedule, lasso_select_k, qubo_select_k
from .kernels import linear_kernel, quantum_kernel_matrix
from .metrics import (MetricSurface, balanced_accuracy, f1_score, geometric_difference,
                      ptri_comparison, write_surface_csv)
from .svm import predict, smo_train

log = logging.getLogger(__name__)


@dataclass
class SweepConfig:
    feature_counts: list = field(default_factory=lambda: [2, 8, 14])
    sample_counts: list = field(default_factory=lambda: [25, 41, 57])
    selection_method: str = "lasso"
    map_kind: str = "zz"
    repetitions: int = 2
    svm_c: float = 1.0
    test_fraction: float = 0.2
    seed: int = 0
    k_pool: int = 20
    scale_lo: float = 0.0
    scale_hi: float = math.pi
    geodiff_reg: float = 1e-7
    # QUBO-only knobs
    qubo_alpha: float = 0.5
    qubo_candidates: int | None = 500
    anneal_sweeps: int = 2000
    anneal_restarts: int = 8

    def __post_init__(self):
        self.feature_counts = [int(f) for f in self.feature_counts]
        self.sample_counts = [int(m) for m in self.sample_counts]
        if self.selection_method not in ("lasso", "qubo"):
            raise ValueError(f"selection_method must be lasso or qubo, got {self.selection_method!r}")
        if self.map_kind not in ("zz", "pauli_z"):
            raise ValueError(f"map_kind must be zz or pauli_z, got {self.map_kind!r}")
        if not self.feature_counts or min(self.feature_counts) < 1:
            raise ValueError("feature_counts must be positive")
        if max(self.feature_counts) > self.k_pool:
            raise ValueError("largest feature count exceeds k_pool")
        if not self.sample_counts or min(self.sample_counts) < 2:
            raise ValueError("sample_counts must be >= 2")
        if self.repetitions < 1 or self.svm_c <= 0:
            raise ValueError("repetitions must be >= 1 and svm_c > 0")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "SweepConfig":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ImportError:  # python < 3.11
                import tomli as tomllib
            return cls.from_dict(tomllib.loads(text))
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SweepResult:
    surfaces: dict
    geometric_diff: MetricSurface
    ptri: dict
    provenance: dict

    def all_surfaces(self) -> dict:
        out = dict(self.surfaces)
        out[self.geometric_diff.name] = self.geometric_diff
        out.update(self.ptri)
        return out

    def to_dict(self) -> dict:
        return {
            "surfaces": {k: s.to_dict() for k, s in sorted(self.all_surfaces().items())},
            "provenance": self.provenance,
        }


def cell_seed(seed: int, f: int, m: int) -> int:
    return int(np.random.SeedSequence([seed, f, m]).generate_state(1)[0])


def _run_cell(X_train, y_train, X_test, y_test, train_rows, sel_idx, f, m, cfg):
    seed = cell_seed(cfg.seed, f, m)
    feats = sel_idx[:f]
    if len(feats) < f:
        raise ValueError(f"selection produced only {len(feats)} features")
    sub = subsample_indices(y_train, m, seed)
    Xs = X_train[np.ix_(sub, feats)]
    Xt = X_test[:, feats]
    params = fit_minmax(Xs, cfg.scale_lo, cfg.scale_hi)
    As, At = apply_minmax(Xs, params), apply_minmax(Xt, params)
    ys = y_train[sub]
    out = {
        "features": [int(i) for i in feats],
        "rows": {
            "subsample": [int(train_rows[i]) for i in sub],
            "scaling_fit": [int(train_rows[i]) for i in sub],
            "gram_train": [int(train_rows[i]) for i in sub],
        },
        "seed": seed,
    }
    grams = {
        "classical": (linear_kernel(As).values, linear_kernel(At, As).values),
        "quantum": (quantum_kernel_matrix(As, None, cfg.map_kind, cfg.repetitions).values,
                    quantum_kernel_matrix(At, As, cfg.map_kind, cfg.repetitions).values),
    }
    scores = {}
    for name, (Ktr, Kte) in grams.items():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = smo_train(Ktr, ys, cfg.svm_c)
        pred, _ = predict(model, Kte)
        scores[f"f1_{name}"] = f1_score(y_test, pred, positive=1)
        scores[f"balanced_accuracy_{name}"] = balanced_accuracy(y_test, pred)
        scores[f"svm_converged_{name}"] = model.converged
    scores["geometric_difference"] = geometric_difference(
        grams["classical"][0], grams["quantum"][0], cfg.geodiff_reg)
    out["scores"] = scores
    return out


METRICS = ("f1", "balanced_accuracy")
KERNEL_NAMES = ("classical", "quantum")


def run_sweep(ds: ExpressionDataset, cfg: SweepConfig, jobs: int = 1) -> SweepResult:
    """Run every (feature count, sample count) cell of the grid.

    Feature selection and all per-cell fitting use training rows only; every
    cell is scored on the same held-out test split.  Cell failures are
    recorded in the provenance and leave NaN in the surfaces.
    """
    train_rows, test_rows = split_indices(ds.labels, cfg.test_fraction, cfg.seed)
    if max(cfg.sample_counts) > train_rows.size:
        raise ValueError(f"sample count {max(cfg.sample_counts)} exceeds training size {train_rows.size}")
    X_train, y_train = ds.values[train_rows], ds.labels[train_rows]
    X_test, y_test = ds.values[test_rows], ds.labels[test_rows]

    if cfg.selection_method == "lasso":
        sel = lasso_select_k(X_train, y_train, cfg.k_pool, ds.feature_ids)
    else:
        sched = AnnealSchedule(sweeps=cfg.anneal_sweeps, restarts=cfg.anneal_restarts, seed=cfg.seed)
        sel = qubo_select_k(X_train, y_train, cfg.k_pool, sched, alpha=cfg.qubo_alpha,
                            candidates=cfg.qubo_candidates, feature_ids=ds.feature_ids)
    log.info("selected %d features by %s", len(sel.indices), sel.method)

    grid = [(f, m) for f in cfg.feature_counts for m in cfg.sample_counts]

    def job(fm):
        f, m = fm
        try:
            return _run_cell(X_train, y_train, X_test, y_test, train_rows, sel.indices, f, m, cfg)
        except Exception as exc:  # noqa: BLE001 - a failed cell must not abort the grid
            log.warning("cell (%d, %d) failed: %s", f, m, exc)
            return {"failed": True, "reason": f"{type(exc).__name__}: {exc}"}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(job, grid))
    else:
        results = [job(fm) for fm in grid]

    fa, sa = cfg.feature_counts, cfg.sample_counts
    names = [f"{mt}_{kn}" for mt in METRICS for kn in KERNEL_NAMES] + ["geometric_difference"]
    grids = {n: np.full((len(fa), len(sa)), np.nan) for n in names}
    cells = {}
    for (f, m), res in zip(grid, results):
        key = f"f={f},m={m}"
        if "scores" in res:
            for n in names:
                grids[n][fa.index(f), sa.index(m)] = res["scores"][n]
            res = dict(res, feature_ids=[ds.feature_ids[i] for i in res["features"]])
        cells[key] = res

    surfaces = {}
    for mt in METRICS:
        for kn in KERNEL_NAMES:
            surfaces[f"{mt}_{kn}"] = MetricSurface(fa, sa, grids[f"{mt}_{kn}"], mt, kn)
    gd = MetricSurface(fa, sa, grids["geometric_difference"], "geometric_difference", "")

    ptri, ptri_note = {}, None
    if len(fa) < 2 or len(sa) < 2:
        ptri_note = "grid too small"
    else:
        for mt in METRICS:
            tc, tq, diff = ptri_comparison(surfaces[f"{mt}_classical"], surfaces[f"{mt}_quantum"])
            for s in (tc, tq, diff):
                ptri[s.name] = s

    provenance = {
        "version": __version__,
        "config": cfg.to_dict(),
        "selection": sel.to_dict(),
        "rows": {
            "train": [int(i) for i in train_rows],
            "test": [int(i) for i in test_rows],
            "selection": [int(i) for i in train_rows],
        },
        "sample_ids": {"train": [ds.sample_ids[i] for i in train_rows],
                       "test": [ds.sample_ids[i] for i in test_rows]},
        "cells": cells,
        "ptri": "computed" if ptri_note is None else f"skipped: {ptri_note}",
    }
    return SweepResult(surfaces, gd, ptri, provenance)


def audit_leakage(res: SweepResult) -> list:
    """Return a list of violations where a test row fed a training stage."""
    rows = res.provenance["rows"]
    test = set(rows["test"])
    bad = []
    if test & set(rows["selection"]):
        bad.append("selection used test rows")
    if test & set(rows["train"]):
        bad.append("train and test splits overlap")
    for key, cell in res.provenance["cells"].items():
        for stage, used in cell.get("rows", {}).items():
            if test & set(used):
                bad.append(f"{key}: {stage} used test rows")
    return bad


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def export_result(res: SweepResult, out_dir, formats=("csv", "json")) -> list:
    """Write surfaces and provenance under ``out_dir``; returns the file manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    formats = set(formats)
    unknown = formats - {"csv", "json"}
    if unknown:
        raise ValueError(f"unknown export formats {sorted(unknown)}")
    written = []
    if not formats:
        warnings.warn("no export formats requested; manifest is empty")
    if "csv" in formats:
        for name, s in sorted(res.all_surfaces().items()):
            p = out / f"{name}.csv"
            write_surface_csv(s, p)
            written.append(p.name)
    if "json" in formats:
        p = out / "result.json"
        _dump_json(res.to_dict(), p)
        written.append(p.name)
    _dump_json({"files": written}, out / "manifest.json")
    return written
