import math

import numpy as np
import pytest

from conftest import circuit_unitary, oracle_state
from eqa_kernel import qsim
from eqa_kernel.qsim import Circuit, Gate

TABLE_I = {
    2: [5, 10, 15, 20],
    3: [8, 16, 24, 32],
    4: [11, 19, 27, 35],
    5: [14, 22, 30, 38],
    6: [17, 25, 33, 41],
}


class TestBuilders:
    def test_zz_counts_n3_r2(self):
        assert qsim.build_zz_feature_map([0.1, 0.2, 0.3], 2).counts() == {"H": 6, "P": 10, "CX": 8}

    def test_zz_n2_r1(self):
        c = qsim.build_zz_feature_map([0.5, 1.0], 1)
        assert c.counts() == {"H": 2, "P": 3, "CX": 2}
        assert qsim.circuit_depth(c) == 5

    def test_zz_angles_at_zero(self):
        c = qsim.build_zz_feature_map([0.0, 0.0, 0.0], 1)
        single = [g.theta for g in c.gates if g.kind == "P" and c.gates.index(g) < 6]
        pair = [g.theta for g in c.gates[6:] if g.kind == "P"]
        assert single == [0.0, 0.0, 0.0]
        assert pair == pytest.approx([2 * math.pi ** 2] * 2)

    def test_zz_gate_order(self):
        c = qsim.build_zz_feature_map([0.3, 0.7], 1)
        assert [g.kind for g in c.gates] == ["H", "H", "P", "P", "CX", "P", "CX"]
        assert c.gates[5].qubits == (1,)
        assert c.gates[5].theta == pytest.approx(2 * (math.pi - 0.3) * (math.pi - 0.7))

    def test_zz_needs_two_qubits(self):
        with pytest.raises(ValueError):
            qsim.build_zz_feature_map([0.3], 1)

    def test_angles_checked(self):
        with pytest.raises(ValueError):
            qsim.build_zz_feature_map([0.3, 4.0], 1)

    def test_pauli_z_counts(self):
        assert qsim.build_pauli_z_feature_map([0.1, 0.2], 2).counts() == {"H": 4, "P": 4, "CX": 0}

    def test_pauli_z_minimal(self):
        c = qsim.build_pauli_z_feature_map([0.4], 1)
        assert [(g.kind, g.qubits) for g in c.gates] == [("H", (0,)), ("P", (0,))]
        assert c.gates[1].theta == pytest.approx(0.8)

    @pytest.mark.parametrize("n", [1, 2, 5])
    @pytest.mark.parametrize("r", [1, 3])
    def test_pauli_z_depth(self, n, r):
        assert qsim.circuit_depth(qsim.build_pauli_z_feature_map(np.full(n, 0.2), r)) == 2 * r

    def test_gate_validation(self):
        with pytest.raises(ValueError):
            Circuit(2, [Gate("CX", (0, 0))])
        with pytest.raises(ValueError):
            Circuit(2, [Gate("H", (2,))])
        with pytest.raises(ValueError):
            Circuit(2, [Gate("P", (0,), float("nan"))])


class TestDepth:
    @pytest.mark.parametrize("n", sorted(TABLE_I))
    def test_table_one(self, n):
        assert [qsim.estimate_resources("zz", n, r).depth for r in range(1, 5)] == TABLE_I[n]

    @pytest.mark.parametrize("n", range(2, 10))
    @pytest.mark.parametrize("r", range(1, 6))
    def test_closed_form(self, n, r):
        est = qsim.estimate_resources("zz", n, r)
        assert est.depth == est.closed_form_depth

    def test_examples(self):
        assert qsim.estimate_resources("zz", 4, 3).depth == 27
        e = qsim.estimate_resources("zz", 5, 1)
        assert (e.depth, e.h_count, e.p_count, e.cx_count) == (14, 5, 9, 8)
        e = qsim.estimate_resources("pauli_z", 3, 2)
        assert (e.depth, e.h_count, e.p_count, e.cx_count) == (4, 6, 6, 0)
        assert qsim.circuit_depth(qsim.build_pauli_z_feature_map(np.zeros(5), 3)) == 6

    @pytest.mark.parametrize("kind", ["zz", "pauli_z"])
    def test_gate_count_formulas(self, kind):
        for n in range(2, 9):
            for r in range(1, 5):
                e = qsim.estimate_resources(kind, n, r)
                want = qsim.expected_gate_counts(kind, n, r)
                assert (e.h_count, e.p_count, e.cx_count) == (want["H"], want["P"], want["CX"])
                assert e.depth <= e.h_count + e.p_count + e.cx_count

    def test_json_roundtrip(self):
        import json
        d = qsim.estimate_resources("zz", 3, 2).to_dict()
        assert json.loads(json.dumps(d))["depth"] == 16


class TestSimulate:
    def test_hadamard(self, each_backend):
        psi = qsim.simulate(Circuit(1, [Gate("H", (0,))]))
        np.testing.assert_allclose(psi, [1 / math.sqrt(2)] * 2, atol=1e-15)

    def test_x_then_cx(self, each_backend):
        c = Circuit(2, [Gate("H", (0,)), Gate("P", (0,), math.pi), Gate("H", (0,)), Gate("CX", (0, 1))])
        psi = qsim.simulate(c)
        expect = np.zeros(4)
        expect[3] = 1
        np.testing.assert_allclose(psi, expect, atol=1e-12)

    def test_cx_control_on_high_qubit(self, each_backend):
        # |q1 q0> = |10> -> CX(1,0) -> |11>
        c = Circuit(2, [Gate("H", (1,)), Gate("P", (1,), math.pi), Gate("H", (1,)), Gate("CX", (1, 0))])
        np.testing.assert_allclose(np.abs(qsim.simulate(c)), [0, 0, 0, 1], atol=1e-12)

    @pytest.mark.parametrize("kind", ["zz", "pauli_z"])
    def test_oracle_n3(self, each_backend, kind, rng):
        for _ in range(5):
            c = qsim.build_feature_map(kind, rng.uniform(0, math.pi, 3), 2)
            assert np.max(np.abs(qsim.simulate(c) - oracle_state(c))) < 1e-10

    def test_random_gate_sequences(self, each_backend, rng):
        for _ in range(20):
            n = int(rng.integers(1, 5))
            gates = []
            for _ in range(15):
                k = rng.integers(0, 3 if n > 1 else 2)
                if k == 0:
                    gates.append(Gate("H", (int(rng.integers(n)),)))
                elif k == 1:
                    gates.append(Gate("P", (int(rng.integers(n)),), float(rng.uniform(-7, 7))))
                else:
                    a, b = rng.choice(n, 2, replace=False)
                    gates.append(Gate("CX", (int(a), int(b))))
            c = Circuit(n, gates)
            np.testing.assert_allclose(qsim.simulate(c), oracle_state(c), atol=1e-10)

    def test_norm_preserved_every_gate(self, rng):
        c = qsim.build_zz_feature_map(rng.uniform(0, math.pi, 4), 2)
        psi = np.zeros(16, dtype=complex)
        psi[0] = 1
        for g in c.gates:
            psi = qsim.simulate(Circuit(4, [g]), psi)
            assert abs(np.vdot(psi, psi) - 1) < 1e-10

    def test_unitary_oracle_is_unitary(self, rng):
        U = circuit_unitary(qsim.build_zz_feature_map(rng.uniform(0, math.pi, 3), 1))
        np.testing.assert_allclose(U.conj().T @ U, np.eye(8), atol=1e-12)

    def test_qubit_limit(self):
        with pytest.raises(ValueError, match="refusing"):
            qsim.simulate(Circuit(qsim.MAX_QUBITS + 1, []))

    def test_draw(self):
        text = qsim.build_zz_feature_map([0.1, 0.2], 1).draw()
        assert text.splitlines()[0].startswith("zz map") and "CX q0,1" in text
