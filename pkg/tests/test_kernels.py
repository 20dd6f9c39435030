import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import oracle_state
from eqa_kernel import kernels, qsim


def test_self_fidelity_is_one(rng):
    x = rng.uniform(0, math.pi, 3)
    for kind in ("zz", "pauli_z"):
        assert kernels.quantum_kernel_entry(x, x, kind, 2) == pytest.approx(1.0, abs=1e-12)


def test_single_qubit_analytic():
    assert kernels.quantum_kernel_entry([math.pi / 2], [math.pi / 4], "pauli_z", 1) == pytest.approx(0.5, abs=1e-12)


def test_zz_entry_matches_oracle(rng):
    for _ in range(5):
        x, y = rng.uniform(0, math.pi, (2, 2))
        sx = oracle_state(qsim.build_zz_feature_map(x, 2))
        sy = oracle_state(qsim.build_zz_feature_map(y, 2))
        want = abs(np.vdot(sy, sx)) ** 2
        assert abs(kernels.quantum_kernel_entry(x, y, "zz", 2) - want) < 1e-10


def test_entry_length_mismatch():
    with pytest.raises(ValueError):
        kernels.quantum_kernel_entry([0.1, 0.2], [0.1], "zz")


class TestMatrix:
    def test_square_properties(self, rng):
        A = rng.uniform(0, math.pi, (6, 3))
        K = kernels.quantum_kernel_matrix(A, map_kind="zz", r=2)
        np.testing.assert_allclose(np.diag(K.values), 1.0, atol=1e-10)
        assert np.array_equal(K.values, K.values.T)
        assert K.is_square

    def test_cross_shape(self, rng):
        A = rng.uniform(0, math.pi, (1, 2))
        B = rng.uniform(0, math.pi, (3, 2))
        K = kernels.quantum_kernel_matrix(A, B, "zz", 2)
        assert K.values.shape == (1, 3)
        for j in range(3):
            assert K.values[0, j] == pytest.approx(kernels.quantum_kernel_entry(A[0], B[j], "zz", 2), abs=1e-12)

    def test_cross_matches_square(self, rng):
        A = rng.uniform(0, math.pi, (4, 2))
        Ks = kernels.quantum_kernel_matrix(A, None, "pauli_z", 2).values
        Kx = kernels.quantum_kernel_matrix(A, A.copy(), "pauli_z", 2).values
        np.testing.assert_allclose(Ks, Kx, atol=1e-12)

    def test_psd_four_samples(self, rng):
        A = rng.uniform(0, math.pi, (4, 2))
        K = kernels.quantum_kernel_matrix(A, None, "zz", 2)
        # eigen-oracle on the Gram matrix of explicitly built states
        S = np.stack([oracle_state(qsim.build_zz_feature_map(a, 2)) for a in A])
        G = np.abs(S.conj() @ S.T) ** 2
        np.testing.assert_allclose(K.values, G, atol=1e-10)
        assert np.linalg.eigvalsh(G).min() >= -1e-8
        assert kernels.check_psd(K)

    def test_feature_mismatch(self):
        with pytest.raises(ValueError):
            kernels.quantum_kernel_matrix(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_cos_squared_single_qubit(self, rng):
        x = rng.uniform(0, math.pi, 7)
        K = kernels.quantum_kernel_matrix(x[:, None], None, "pauli_z", 1).values
        np.testing.assert_allclose(K, np.cos(x[:, None] - x[None, :]) ** 2, atol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0, 2 * math.pi), st.integers(0, 1000))
    def test_global_phase_invariance(self, theta, seed):
        r = np.random.default_rng(seed)
        x, y = r.uniform(0, math.pi, (2, 3))
        a = qsim.feature_state("zz", x, 2)
        b = qsim.feature_state("zz", y, 2)
        base = kernels.fidelity(a, b)
        assert kernels.fidelity(a * np.exp(1j * theta), b) == pytest.approx(base, abs=1e-12)
        assert kernels.fidelity(a, b * np.exp(-1j * theta)) == pytest.approx(base, abs=1e-12)


class TestLinear:
    def test_identity(self):
        K = kernels.linear_kernel(np.eye(2))
        np.testing.assert_array_equal(K.values, np.eye(2))

    def test_dot(self):
        assert kernels.linear_kernel([[1, 2]], [[3, 4]]).values.tolist() == [[11.0]]

    def test_psd(self, rng):
        K = kernels.linear_kernel(rng.normal(size=(5, 3)))
        assert np.linalg.eigvalsh(K.values).min() >= -1e-8

    def test_mismatch(self):
        with pytest.raises(ValueError):
            kernels.linear_kernel(np.ones((2, 2)), np.ones((2, 3)))


def test_csv_roundtrip(tmp_path, rng):
    A = rng.uniform(0, math.pi, (3, 2))
    K = kernels.quantum_kernel_matrix(A, None, "zz", 2, row_ids=["a", "b", "c"])
    p = tmp_path / "k.csv"
    kernels.write_kernel_csv(K, p)
    back = kernels.read_kernel_csv(p)
    assert back.kind == "quantum_zz"
    assert back.row_ids == ["a", "b", "c"] and back.col_ids == ["a", "b", "c"]
    np.testing.assert_array_equal(back.values, K.values)
