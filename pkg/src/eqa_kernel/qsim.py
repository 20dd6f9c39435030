"""Feature-map circuits, dense statevector simulation and resource counting.

Qubit ``q`` is bit ``q`` of the basis-state index (little-endian), so the
amplitude of ``|q_{n-1} ... q_1 q_0>`` lives at ``sum(q_k << k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import _accel

MAX_QUBITS = 24
MAP_KINDS = ("zz", "pauli_z")


@dataclass(frozen=True)
class Gate:
    kind: str  # "H", "P" or "CX"
    qubits: tuple
    theta: float = 0.0

    def __str__(self):
        qs = ",".join(str(q) for q in self.qubits)
        return f"P({self.theta:.6g}) q{qs}" if self.kind == "P" else f"{self.kind} q{qs}"


@dataclass
class Circuit:
    n_qubits: int
    gates: list = field(default_factory=list)
    map_kind: str = "zz"
    repetitions: int = 1
    entanglement: str = "linear"

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for g in self.gates:
            _check_gate(g, self.n_qubits)

    def append(self, gate: Gate) -> None:
        _check_gate(gate, self.n_qubits)
        self.gates.append(gate)

    def counts(self) -> dict:
        c = {"H": 0, "P": 0, "CX": 0}
        for g in self.gates:
            c[g.kind] += 1
        return c

    def draw(self) -> str:
        """One gate per line; meant for debugging only."""
        head = f"{self.map_kind} map, {self.n_qubits} qubits, r={self.repetitions}"
        return "\n".join([head, *(str(g) for g in self.gates)])


def _check_gate(g: Gate, n: int) -> None:
    if g.kind not in ("H", "P", "CX"):
        raise ValueError(f"unsupported gate kind {g.kind!r}")
    want = 2 if g.kind == "CX" else 1
    if len(g.qubits) != want:
        raise ValueError(f"{g.kind} acts on {want} qubit(s), got {g.qubits}")
    if len(set(g.qubits)) != len(g.qubits):
        raise ValueError(f"repeated qubit in {g}")
    if any(q < 0 or q >= n for q in g.qubits):
        raise ValueError(f"qubit index out of range for {n} qubits: {g}")
    if not math.isfinite(g.theta):
        raise ValueError("gate angle must be finite")


@dataclass(frozen=True)
class ResourceEstimate:
    depth: int
    h_count: int
    p_count: int
    cx_count: int
    n_qubits: int
    repetitions: int
    map_kind: str = "zz"
    closed_form_depth: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


# ----------------------------------------------------------------- builders

def _check_angles(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if not np.isfinite(x).all():
        raise ValueError("feature angles must be finite")
    if ((x < -1e-12) | (x > math.pi + 1e-12)).any():
        raise ValueError("feature angles must lie in [0, pi]")
    return x


def build_zz_feature_map(x, r: int = 2) -> Circuit:
    """Second-order ZZ feature map with linear entanglement.

    Each repetition applies H on all qubits, P(2 x_k) on each qubit and, for
    every adjacent pair (i, i+1), CX . P(2 (pi - x_i)(pi - x_{i+1})) . CX with
    the phase on qubit i+1.
    """
    x = _check_angles(x)
    n = x.size
    if n < 2:
        raise ValueError("ZZ feature map needs at least 2 qubits")
    c = Circuit(n, [], "zz", int(r))
    for _ in range(r):
        for q in range(n):
            c.gates.append(Gate("H", (q,)))
        for q in range(n):
            c.gates.append(Gate("P", (q,), 2.0 * x[q]))
        for i in range(n - 1):
            phi = (math.pi - x[i]) * (math.pi - x[i + 1])
            c.gates.append(Gate("CX", (i, i + 1)))
            c.gates.append(Gate("P", (i + 1,), 2.0 * phi))
            c.gates.append(Gate("CX", (i, i + 1)))
    return c


def build_pauli_z_feature_map(x, r: int = 2) -> Circuit:
    x = _check_angles(x)
    n = x.size
    if n < 1:
        raise ValueError("Pauli-Z feature map needs at least 1 qubit")
    c = Circuit(n, [], "pauli_z", int(r))
    for _ in range(r):
        for q in range(n):
            c.gates.append(Gate("H", (q,)))
        for q in range(n):
            c.gates.append(Gate("P", (q,), 2.0 * x[q]))
    return c


def build_feature_map(map_kind: str, x, r: int = 2) -> Circuit:
    if map_kind == "zz":
        return build_zz_feature_map(x, r)
    if map_kind == "pauli_z":
        return build_pauli_z_feature_map(x, r)
    raise ValueError(f"unknown feature map {map_kind!r}; expected one of {MAP_KINDS}")


# ------------------------------------------------------------- gate kernels

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _h_loop(psi, q):
    stride = 1 << q
    for base in range(0, psi.size, stride << 1):
        for i in range(base, base + stride):
            a = psi[i]
            b = psi[i + stride]
            psi[i] = (a + b) * 0.7071067811865476
            psi[i + stride] = (a - b) * 0.7071067811865476


def _p_loop(psi, q, phase):
    stride = 1 << q
    for base in range(stride, psi.size, stride << 1):
        for i in range(base, base + stride):
            psi[i] *= phase


def _cx_loop(psi, control, target):
    cbit = 1 << control
    tbit = 1 << target
    for i in range(psi.size):
        if (i & cbit) and not (i & tbit):
            j = i | tbit
            tmp = psi[i]
            psi[i] = psi[j]
            psi[j] = tmp


def _run_loop(psi, kinds, q0, q1, phases):
    for g in range(kinds.size):
        k = kinds[g]
        if k == 0:
            _h_loop_nb(psi, q0[g])
        elif k == 1:
            _p_loop_nb(psi, q0[g], phases[g])
        else:
            _cx_loop_nb(psi, q0[g], q1[g])


_h_loop_nb = _accel.jit(_h_loop)
_p_loop_nb = _accel.jit(_p_loop)
_cx_loop_nb = _accel.jit(_cx_loop)
_run_nb = _accel.jit(_run_loop)


def _view(psi, n, q):
    # axes: (higher bits, bit q, lower bits)
    return psi.reshape(1 << (n - q - 1), 2, 1 << q)


def _h_np(psi, n, q):
    v = _view(psi, n, q)
    a = v[:, 0, :].copy()
    b = v[:, 1, :]
    v[:, 0, :] = (a + b) * _INV_SQRT2
    v[:, 1, :] = (a - b) * _INV_SQRT2


def _p_np(psi, n, q, phase):
    _view(psi, n, q)[:, 1, :] *= phase


def _cx_np(psi, n, control, target):
    v = psi.reshape([2] * n)  # axis k <-> qubit n-1-k
    ca, ta = n - 1 - control, n - 1 - target
    sl1 = [slice(None)] * n
    sl1[ca] = 1
    sub = v[tuple(sl1)]  # control = 1 block
    t_axis = ta if ta < ca else ta - 1
    sub[...] = np.flip(sub, axis=t_axis).copy()


def _encode(c: Circuit):
    m = len(c.gates)
    kinds = np.empty(m, dtype=np.int64)
    q0 = np.zeros(m, dtype=np.int64)
    q1 = np.zeros(m, dtype=np.int64)
    phases = np.ones(m, dtype=np.complex128)
    for i, g in enumerate(c.gates):
        q0[i] = g.qubits[0]
        if g.kind == "H":
            kinds[i] = 0
        elif g.kind == "P":
            kinds[i] = 1
            phases[i] = complex(math.cos(g.theta), math.sin(g.theta))
        else:
            kinds[i] = 2
            q1[i] = g.qubits[1]
    return kinds, q0, q1, phases


def simulate(c: Circuit, initial=None) -> np.ndarray:
    """Apply the circuit's gates in order to |0...0> and return the amplitudes."""
    n = c.n_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"refusing to simulate {n} qubits (limit {MAX_QUBITS})")
    if initial is None:
        psi = np.zeros(1 << n, dtype=np.complex128)
        psi[0] = 1.0
    else:
        psi = np.array(initial, dtype=np.complex128)
        if psi.shape != (1 << n,):
            raise ValueError("initial state has the wrong length")
    kinds, q0, q1, phases = _encode(c)
    if _accel.use_numba():
        _run_nb(psi, kinds, q0, q1, phases)
        return psi
    for k, a, b, ph in zip(kinds, q0, q1, phases):
        if k == 0:
            _h_np(psi, n, a)
        elif k == 1:
            _p_np(psi, n, a, ph)
        else:
            _cx_np(psi, n, a, b)
    return psi


def feature_state(map_kind: str, x, r: int = 2) -> np.ndarray:
    return simulate(build_feature_map(map_kind, x, r))


# -------------------------------------------------------------- resources

def circuit_depth(c: Circuit) -> int:
    """As-soon-as-possible layer count; every gate occupies one layer."""
    finish = [0] * c.n_qubits
    depth = 0
    for g in c.gates:
        layer = 1 + max(finish[q] for q in g.qubits)
        for q in g.qubits:
            finish[q] = layer
        depth = max(depth, layer)
    return depth


def closed_form_depth(map_kind: str, n: int, r: int) -> int:
    if map_kind == "pauli_z":
        return 2 * r
    if n == 2:
        return 5 * r
    return (3 * n - 1) + 8 * (r - 1)


def expected_gate_counts(map_kind: str, n: int, r: int) -> dict:
    if map_kind == "zz":
        return {"H": n * r, "P": r * (2 * n - 1), "CX": 2 * (n - 1) * r}
    return {"H": n * r, "P": n * r, "CX": 0}


def estimate_resources(map_kind: str, n: int, r: int = 2) -> ResourceEstimate:
    if n < 1 or r < 1:
        raise ValueError("qubit count and repetitions must be >= 1")
    c = build_feature_map(map_kind, np.full(n, 0.5), r)
    counts = c.counts()
    return ResourceEstimate(
        depth=circuit_depth(c), h_count=counts["H"], p_count=counts["P"],
        cx_count=counts["CX"], n_qubits=n, repetitions=r, map_kind=map_kind,
        closed_form_depth=closed_form_depth(map_kind, n, r),
    )


def depth_table(map_kind: str = "zz", qubits=range(2, 7), reps=range(1, 5)) -> np.ndarray:
    return np.array([[estimate_resources(map_kind, n, r).depth for r in reps] for n in qubits])


def render_table(map_kind: str = "zz", qubits=range(2, 7), reps=range(1, 5)) -> str:
    qubits, reps = list(qubits), list(reps)
    lines = [f"Depth of {map_kind} feature map (linear entanglement)",
             "n\\r " + "".join(f"{r:>6d}" for r in reps)]
    for n, row in zip(qubits, depth_table(map_kind, qubits, reps)):
        lines.append(f"{n:<4d}" + "".join(f"{d:>6d}" for d in row))
    lines.append("")
    lines.append("Gate counts per map: H, P (Z-phase), CX")
    lines.append(f"  zz      : H = n*r, P = r*(2n-1), CX = 2(n-1)*r")
    lines.append(f"  pauli_z : H = n*r, P = n*r,      CX = 0")
    return "\n".join(lines)
