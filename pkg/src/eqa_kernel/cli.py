"""``eqa`` command line: one subcommand per pipeline stage plus the full sweep."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, data, kernels, metrics, qsim, svm
from .feature_select import AnnealSchedule, lasso_select_k, qubo_select_k

log = logging.getLogger("eqa")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(payload, out=None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ commands

def cmd_preprocess(a):
    ds = data.load_expression_csv(a.inputs, a.format, a.labels)
    if not a.no_quantile:
        ds = ds.with_values(data.quantile_normalize(ds.values))
    if a.scale:
        ds = ds.with_values(data.apply_minmax(ds.values, data.fit_minmax(ds.values, a.lo, a.hi)))
    data.write_tidy_csv(ds, a.out)
    log.info("wrote %d samples x %d features to %s", ds.n_samples, ds.n_features, a.out)


def cmd_select(a):
    ds = data.load_expression_csv(a.input, "tidy")
    if a.method == "lasso":
        sel = lasso_select_k(ds.values, ds.labels, a.k, ds.feature_ids)
    else:
        sched = AnnealSchedule(sweeps=a.sweeps, restarts=a.restarts, seed=a.seed)
        sel = qubo_select_k(ds.values, ds.labels, a.k, sched, alpha=a.alpha,
                            candidates=a.candidates, feature_ids=ds.feature_ids)
    _emit(sel.to_dict(), a.out)


def cmd_kernel(a):
    A = data.load_expression_csv(a.input, "tidy")
    B = data.load_expression_csv(a.against, "tidy") if a.against else None
    kind = "linear" if a.map == "linear" else f"quantum_{a.map}"
    K = kernels.compute_kernel(kind, A.values, None if B is None else B.values, a.reps,
                               A.sample_ids, None if B is None else B.sample_ids)
    kernels.write_kernel_csv(K, a.out)


def _labels_for(ids, path):
    lab = data.read_label_file(path)
    missing = [i for i in ids if i not in lab]
    if missing:
        raise data.IngestionError(f"{path}: no label for {missing}")
    return np.array([lab[i] for i in ids], dtype=np.int64)


def cmd_train_eval(a):
    Ktr = kernels.read_kernel_csv(a.train_kernel)
    Kte = kernels.read_kernel_csv(a.test_kernel)
    if list(Kte.col_ids) != list(Ktr.row_ids):
        raise ValueError("test kernel columns must be the training samples in training order")
    ytr = _labels_for(Ktr.row_ids, a.train_labels)
    yte = _labels_for(Kte.row_ids, a.test_labels)
    model = svm.smo_train(Ktr.values, ytr, a.c, a.tol)
    pred, dec = svm.predict(model, Kte.values)
    out = {
        "kernel": Ktr.kind,
        "c": a.c,
        "f1": metrics.f1_score(yte, pred, positive=1),
        "balanced_accuracy": metrics.balanced_accuracy(yte, pred),
        "predictions": {i: int(p) for i, p in zip(Kte.row_ids, pred)},
        "decision_values": {i: float(d) for i, d in zip(Kte.row_ids, dec)},
        "svm": model.to_dict(),
    }
    if a.model_out:
        model.save(a.model_out)
    _emit(out, a.out)


def cmd_sweep(a):
    from .sweep import SweepConfig, audit_leakage, export_result, run_sweep

    cfg = SweepConfig.from_file(a.config)
    if a.seed is not None:
        cfg.seed = a.seed
    ds = data.load_expression_csv(a.data, "tidy")
    res = run_sweep(ds, cfg, jobs=a.jobs)
    bad = audit_leakage(res)
    if bad:
        raise RuntimeError(f"leakage audit failed: {bad}")
    files = export_result(res, a.out, a.formats)
    failed = [k for k, c in res.provenance["cells"].items() if c.get("failed")]
    _emit({"out_dir": str(a.out), "files": files, "failed_cells": failed})


def cmd_geodiff(a):
    kc = kernels.read_kernel_csv(a.classical)
    kq = kernels.read_kernel_csv(a.quantum)
    g = metrics.geometric_difference(kc.values, kq.values, a.reg)
    if a.json:
        _emit({"geometric_difference": g, "reg": a.reg, "classical": str(a.classical),
               "quantum": str(a.quantum)})
    else:
        print(repr(g))


def _metric_name(path) -> str:
    stem = Path(path).stem
    for suffix in ("_classical", "_quantum"):
        if stem.endswith(suffix):
            return stem[: -len(suffix)]
    return stem


def cmd_ptri(a):
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    name = _metric_name(a.surface)
    base = metrics.read_surface_csv(a.surface, name, "classical" if a.quantum else "")
    written = []
    if a.quantum:
        q = metrics.read_surface_csv(a.quantum, name, "quantum")
        surfaces = metrics.ptri_comparison(base, q)
    else:
        surfaces = (metrics.tri_surface(base),)
    for s in surfaces:
        p = out / f"{s.name}.csv"
        metrics.write_surface_csv(s, p)
        written.append(p.name)
    _emit({"files": written})


def cmd_resources(a):
    if a.table:
        qubits = range(1 if a.map == "pauli_z" else 2, 7) if a.qubits is None else [a.qubits]
        reps = range(1, 5) if a.reps is None else [a.reps]
        if a.json:
            rows = [qsim.estimate_resources(a.map, n, r).to_dict() for n in qubits for r in reps]
            _emit({"map": a.map, "qubits": list(qubits), "reps": list(reps),
                   "depth": qsim.depth_table(a.map, qubits, reps).tolist(), "entries": rows})
        else:
            print(qsim.render_table(a.map, qubits, reps))
        return
    if a.qubits is None:
        raise UsageError("resources needs --qubits (or --table)")
    est = qsim.estimate_resources(a.map, a.qubits, 2 if a.reps is None else a.reps)
    _emit(est.to_dict())


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eqa", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("preprocess", help="ingest, quantile-normalize and optionally scale")
    s.add_argument("inputs", nargs="+", type=Path)
    s.add_argument("--format", choices=["golub-wide", "tidy"], default="tidy")
    s.add_argument("--labels", type=Path, help="sample_id,label file (golub-wide)")
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--no-quantile", action="store_true")
    s.add_argument("--scale", action="store_true", help="min-max scale every feature")
    s.add_argument("--lo", type=float, default=0.0)
    s.add_argument("--hi", type=float, default=math.pi)
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("select", help="Lasso or QUBO feature selection")
    s.add_argument("input", type=Path)
    s.add_argument("--method", choices=["lasso", "qubo"], required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--sweeps", type=int, default=2000)
    s.add_argument("--restarts", type=int, default=8)
    s.add_argument("--candidates", type=int, default=None,
                   help="restrict the QUBO to the N most relevant features")
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("kernel", help="Gram matrix from angle-scaled data")
    s.add_argument("input", type=Path)
    s.add_argument("--against", type=Path, help="column samples (defaults to input)")
    s.add_argument("--map", choices=["zz", "pauli_z", "linear"], required=True)
    s.add_argument("--reps", type=int, default=2)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_kernel)

    s = sub.add_parser("train-eval", help="train an SVM on a kernel and score the test kernel")
    s.add_argument("--train-kernel", type=Path, required=True)
    s.add_argument("--test-kernel", type=Path, required=True)
    s.add_argument("--train-labels", type=Path, required=True)
    s.add_argument("--test-labels", type=Path, required=True)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--tol", type=float, default=1e-3)
    s.add_argument("--model-out", type=Path)
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_train_eval)

    s = sub.add_parser("sweep", help="run the full configuration grid")
    s.add_argument("--config", type=Path, required=True)
    s.add_argument("--data", type=Path, required=True, help="preprocessed tidy CSV")
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--seed", type=int, default=None, help="override the config seed")
    s.add_argument("--formats", nargs="*", choices=["csv", "json"], default=["csv", "json"])
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("geodiff", help="geometric difference of two kernel CSVs")
    s.add_argument("classical", type=Path)
    s.add_argument("quantum", type=Path)
    s.add_argument("--reg", type=float, default=1e-7)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_geodiff)

    s = sub.add_parser("ptri", help="terrain ruggedness of metric surfaces")
    s.add_argument("surface", type=Path, help="surface CSV (classical when --quantum is given)")
    s.add_argument("--quantum", type=Path)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_ptri)

    s = sub.add_parser("resources", help="depth and gate counts of a feature map")
    s.add_argument("--map", choices=list(qsim.MAP_KINDS), default="zz")
    s.add_argument("--qubits", type=int)
    s.add_argument("--reps", type=int)
    s.add_argument("--table", action="store_true", help="depth table over n=2..6, r=1..4")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_resources)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        a.func(a)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"eqa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"eqa: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
