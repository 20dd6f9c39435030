import csv
import os
from functools import reduce

import numpy as np
import pytest

from eqa_kernel import _accel
from eqa_kernel.data import ExpressionDataset, quantile_normalize


@pytest.fixture(params=["numba", "numpy"])
def each_backend(request):
    prev = _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def synthetic_expression(n_features=300, n_informative=12, seed=0, n_all=47, n_aml=25):
    """Golub-shaped toy data: log-normal expression with a few shifted genes."""
    r = np.random.default_rng(seed)
    y = np.array([0] * n_all + [1] * n_aml)
    r.shuffle(y)
    X = r.lognormal(6.0, 1.0, size=(y.size, n_features))
    X[:, :n_informative] *= np.exp(0.9 * y)[:, None]
    return ExpressionDataset(
        quantile_normalize(np.log(X)),
        [f"G{i:05d}_at" for i in range(n_features)],
        y,
        [f"P{i}" for i in range(y.size)],
    )


GOLUB_FILES = ("data_set_ALL_AML_train.csv", "data_set_ALL_AML_independent.csv", "actual.csv")


def write_golub_wide_dir(directory, n_features=7129, n_informative=40, seed=0):
    """Raw-intensity files in the Golub layout: 38 train + 34 independent samples."""
    r = np.random.default_rng(seed)
    y = np.array([0] * 27 + [1] * 11 + [0] * 20 + [1] * 14)
    X = r.lognormal(6.0, 1.0, size=(y.size, n_features)) - 100.0
    X[:, :n_informative] += 1500.0 * y[:, None]
    genes = [f"G{i:05d}_at" for i in range(n_features)]
    parts = ((GOLUB_FILES[0], range(38)), (GOLUB_FILES[1], range(38, 72)))
    for name, rows in parts:
        with open(os.path.join(directory, name), "w", newline="") as fh:
            w = csv.writer(fh)
            header = ["Gene Description", "Gene Accession Number"]
            for k, i in enumerate(rows):
                header += [str(i + 1), "call" if k == 0 else f"call.{k}"]
            w.writerow(header)
            for g, gene in enumerate(genes):
                row = [f"desc {g}", gene]
                for i in rows:
                    row += [f"{X[i, g]:.0f}", "P"]
                w.writerow(row)
    with open(os.path.join(directory, GOLUB_FILES[2]), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["patient", "cancer"])
        for i, lab in enumerate(y):
            w.writerow([i + 1, "AML" if lab else "ALL"])


@pytest.fixture
def toy_dataset():
    return synthetic_expression()


# ------------------------------------------------------------ unitary oracle

H1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _embed(op, q, n):
    # qubit 0 is the rightmost Kronecker factor
    mats = [op if k == q else np.eye(2) for k in reversed(range(n))]
    return reduce(np.kron, mats)


def gate_unitary(g, n):
    if g.kind == "H":
        return _embed(H1, g.qubits[0], n)
    if g.kind == "P":
        return _embed(np.diag([1, np.exp(1j * g.theta)]), g.qubits[0], n)
    c, t = g.qubits
    P0 = np.diag([1, 0]).astype(complex)
    P1 = np.diag([0, 1]).astype(complex)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    return _embed(P0, c, n) + _embed(P1, c, n) @ _embed(X, t, n)


def circuit_unitary(c):
    U = np.eye(1 << c.n_qubits, dtype=complex)
    for g in c.gates:
        U = gate_unitary(g, c.n_qubits) @ U
    return U


def oracle_state(c):
    return circuit_unitary(c)[:, 0]


GOLUB_DIR = os.environ.get("EQA_GOLUB_DIR")


# ---------------------------------------------------- acceptance reporting

ACCEPTANCE_LINES = []


def record_criterion(name, passed, detail=""):
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
