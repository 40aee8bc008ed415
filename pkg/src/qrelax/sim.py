"""Dense statevector simulation.

States are complex arrays of length ``2**n``. Qubit ``q`` is bit ``q`` of the
amplitude index (little-endian), everywhere in this package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .encode import PauliHamiltonian

MAX_QUBITS = 24
_COMPILE_LIMIT = 1 << 22  # complex entries kept per compiled Hamiltonian


class CapacityError(ValueError):
    pass


def check_capacity(n: int, cap: int = MAX_QUBITS) -> None:
    if n > cap:
        raise CapacityError(f"{n} qubits exceeds the simulator cap of {cap}")


def zero_state(n: int) -> np.ndarray:
    check_capacity(n)
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    return psi


def n_qubits_of(state: np.ndarray) -> int:
    n = int(state.size).bit_length() - 1
    if 1 << n != state.size:
        raise ValueError("state length is not a power of two")
    return n


# ---------------------------------------------------------------------------
# gates

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def rotation(axis: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if axis == "X":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if axis == "Y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "Z":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=complex)
    raise ValueError(f"unknown rotation axis {axis!r}")


def rxx(theta: float) -> np.ndarray:
    """exp(-i theta X(x)X / 2) on |a b>, first qubit as the high bit."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    m = np.eye(4, dtype=complex) * c
    m[0, 3] = m[1, 2] = m[2, 1] = m[3, 0] = -1j * s
    return m


def apply_1q(state: np.ndarray, matrix: np.ndarray, q: int) -> np.ndarray:
    n = n_qubits_of(state)
    psi = state.reshape(1 << (n - q - 1), 2, 1 << q)
    return np.matmul(matrix, psi).reshape(-1)


def apply_2q(state: np.ndarray, matrix: np.ndarray, q0: int, q1: int) -> np.ndarray:
    n = n_qubits_of(state)
    if q0 == q1:
        raise ValueError("two-qubit gate needs distinct qubits")
    psi = state.reshape([2] * n)
    a0, a1 = n - 1 - q0, n - 1 - q1
    psi = np.moveaxis(psi, (a0, a1), (0, 1)).reshape(4, -1)
    psi = (matrix @ psi).reshape([2, 2] + [2] * (n - 2))
    return np.moveaxis(psi, (0, 1), (a0, a1)).reshape(-1)


_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
GATES = ("RX", "RY", "RZ", "RXX", "H", "CX", "COST")


class _Index:
    """Cached index arithmetic for one register size."""

    _cache: dict[int, "_Index"] = {}

    def __init__(self, n: int):
        self.idx = np.arange(1 << n)
        self._flip: dict[int, np.ndarray] = {}
        self._z: dict[int, np.ndarray] = {}

    @classmethod
    def get(cls, n: int) -> "_Index":
        if n not in cls._cache:
            cls._cache[n] = cls(n)
        return cls._cache[n]

    def flip(self, mask: int) -> np.ndarray:
        if mask not in self._flip:
            self._flip[mask] = self.idx ^ mask
        return self._flip[mask]

    def z(self, q: int) -> np.ndarray:
        """+1 where qubit q is 0, -1 where it is 1."""
        if q not in self._z:
            self._z[q] = 1.0 - 2.0 * ((self.idx >> q) & 1)
        return self._z[q]


def apply_gate(state: np.ndarray, gate: str, qubits: Sequence[int], angle: float = 0.0) -> np.ndarray:
    n = n_qubits_of(state)
    for q in qubits:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
    if not math.isfinite(angle):
        raise ValueError("gate angle must be finite")
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    ix = _Index.get(n)
    if gate == "RX":
        return c * state - 1j * s * state[ix.flip(1 << qubits[0])]
    if gate == "RY":
        return c * state - s * ix.z(qubits[0]) * state[ix.flip(1 << qubits[0])]
    if gate == "RZ":
        return state * (c - 1j * s * ix.z(qubits[0]))
    if gate == "RXX":
        if qubits[0] == qubits[1]:
            raise ValueError("two-qubit gate needs distinct qubits")
        return c * state - 1j * s * state[ix.flip((1 << qubits[0]) | (1 << qubits[1]))]
    if gate == "H":
        return apply_1q(state, _H, qubits[0])
    if gate == "CX":
        return apply_2q(state, _CX, qubits[0], qubits[1])
    raise ValueError(f"unsupported gate {gate!r}")


# ---------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class Op:
    gate: str
    qubits: tuple[int, ...]
    param: int | None = None  # slot in the parameter vector
    scale: float = 1.0
    angle: float = 0.0  # used when param is None


@dataclass
class Circuit:
    n_qubits: int
    ops: list[Op] = field(default_factory=list)
    n_params: int = 0
    cost_diagonal: np.ndarray | None = None  # used by COST ops

    def add(self, gate: str, qubits, param: bool | int = True, scale: float = 1.0, angle: float = 0.0) -> None:
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise IndexError(f"qubit {q} out of range for {self.n_qubits} qubits")
        if param is True:
            slot = self.n_params
            self.n_params += 1
        elif param is False:
            slot = None
        else:
            slot = int(param)
            self.n_params = max(self.n_params, slot + 1)
        self.ops.append(Op(gate, tuple(qubits), slot, scale, angle))

    def netlist(self) -> str:
        lines = []
        for op in self.ops:
            qs = ",".join(str(q) for q in op.qubits)
            arg = f"{op.scale:g}*t{op.param}" if op.param is not None else f"{op.angle:.6g}"
            lines.append(f"{op.gate} {qs} {arg}")
        return "\n".join(lines) + "\n"

    def run(self, params: Sequence[float] = (), state: np.ndarray | None = None) -> np.ndarray:
        if len(params) != self.n_params:
            raise ValueError(f"circuit takes {self.n_params} parameters, got {len(params)}")
        psi = zero_state(self.n_qubits) if state is None else np.array(state, dtype=complex)
        for op in self.ops:
            angle = op.scale * params[op.param] if op.param is not None else op.angle
            if op.gate == "COST":
                psi *= np.exp(-1j * angle * self.cost_diagonal)
            elif op.gate == "RXX":
                if op.qubits[0] == op.qubits[1]:
                    raise ValueError("two-qubit gate needs distinct qubits")
                _kernels.apply_rxx_inplace(psi, op.qubits[0], op.qubits[1], math.cos(angle / 2), math.sin(angle / 2))
            elif op.gate == "CX":
                if op.qubits[0] == op.qubits[1]:
                    raise ValueError("two-qubit gate needs distinct qubits")
                _kernels.apply_cx_inplace(psi, op.qubits[0], op.qubits[1])
            elif op.gate in ("RX", "RY", "RZ", "H"):
                m = _H if op.gate == "H" else rotation(op.gate[1], angle)
                _kernels.apply_1q_inplace(psi, op.qubits[0], m[0, 0], m[0, 1], m[1, 0], m[1, 1])
            else:
                psi = apply_gate(psi, op.gate, op.qubits, angle)
        return psi


# ---------------------------------------------------------------------------
# ansatz families

FAMILIES = ("brickwork", "su2", "pauli2design", "realamp", "qaoa")
ENTANGLEMENTS = ("linear", "circular", "full")


@dataclass(frozen=True)
class AnsatzSpec:
    family: str = "brickwork"
    layers: int = 8
    entanglement: str = "full"
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown ansatz family {self.family!r}")
        if self.layers < 0:
            raise ValueError("layers must be >= 0")
        if self.family in ("su2", "pauli2design", "realamp") and self.entanglement not in ENTANGLEMENTS:
            raise ValueError(f"{self.family} does not support entanglement {self.entanglement!r}")

    def label(self) -> str:
        if self.family in ("brickwork", "qaoa"):
            return f"{self.family}/p{self.layers}"
        return f"{self.family}-{self.entanglement}/p{self.layers}"


def entangler_pairs(n: int, pattern: str) -> list[tuple[int, int]]:
    if n < 2:
        return []
    if pattern == "linear":
        return [(i, i + 1) for i in range(n - 1)]
    if pattern == "circular":
        pairs = [(i, i + 1) for i in range(n - 1)]
        return pairs + [(n - 1, 0)] if n > 2 else pairs
    if pattern == "full":
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    raise ValueError(f"unknown entanglement {pattern!r}")


def diagonal_values(ham: PauliHamiltonian) -> np.ndarray:
    """Diagonal of a Z-only Hamiltonian in the computational basis."""
    n = ham.n_qubits
    idx = np.arange(1 << n)
    diag = np.full(1 << n, ham.offset, dtype=float)
    for coef, string in ham.terms:
        mask = 0
        for q, a in string:
            if a != "Z":
                raise ValueError("cost Hamiltonian must be diagonal")
            mask |= 1 << q
        diag += coef * _parity_sign(idx & mask)
    return diag


def build_ansatz(spec: AnsatzSpec, n_qubits: int, cost: PauliHamiltonian | None = None) -> Circuit:
    if n_qubits < 1:
        raise ValueError("ansatz needs at least one qubit")
    check_capacity(n_qubits)
    circ = Circuit(n_qubits)
    n = n_qubits
    if spec.family == "brickwork":
        for k in range(spec.layers):
            axis = "XYZ"[k % 3]
            for q in range(n):
                circ.add("R" + axis, (q,))
            for q in range(k % 2, n - 1, 2):
                circ.add("RXX", (q, q + 1))
        return circ
    if spec.family == "qaoa":
        if cost is None:
            raise ValueError("qaoa ansatz needs the diagonal cost Hamiltonian")
        circ.cost_diagonal = diagonal_values(cost)
        for q in range(n):
            circ.add("H", (q,), param=False)
        for k in range(spec.layers):
            circ.add("COST", tuple(range(n)), param=2 * k)
            for q in range(n):
                circ.add("RX", (q,), param=2 * k + 1, scale=2.0)
        return circ

    pairs = entangler_pairs(n, spec.entanglement)
    rng = np.random.default_rng(spec.seed)

    def rotation_block():
        for q in range(n):
            if spec.family == "su2":
                circ.add("RY", (q,))
                circ.add("RZ", (q,))
            elif spec.family == "realamp":
                circ.add("RY", (q,))
            else:
                circ.add("R" + "XYZ"[int(rng.integers(3))], (q,))

    if spec.family == "pauli2design":
        for q in range(n):
            circ.add("RY", (q,), param=False, angle=math.pi / 4)
    rotation_block()
    for _ in range(spec.layers):
        for a, b in pairs:
            circ.add("CX", (a, b), param=False)
        rotation_block()
    return circ


# ---------------------------------------------------------------------------
# expectation values


def _parity_sign(masked: np.ndarray) -> np.ndarray:
    """(-1)**popcount for each entry."""
    v = masked.astype(np.uint64)
    parity = np.zeros(v.shape, dtype=np.uint64)
    while np.any(v):
        parity ^= v & np.uint64(1)
        v >>= np.uint64(1)
    return 1.0 - 2.0 * parity.astype(float)


class CompiledHamiltonian:
    """Pauli terms grouped by X/Y flip mask.

    P|i> = phase(i) |i ^ flip| so each group contributes
    ``sum_i conj(psi[i ^ flip]) * w(i) * psi[i]`` with ``w`` the summed phases.
    """

    def __init__(self, ham: PauliHamiltonian):
        self.ham = ham
        self.n = ham.n_qubits
        idx = np.arange(1 << self.n)
        self._idx = idx
        groups: dict[int, list[tuple[complex, int]]] = {}
        for coef, string in ham.terms:
            flip = sign_mask = 0
            n_y = 0
            for q, a in string:
                if q >= self.n:
                    raise ValueError(f"term acts on qubit {q} beyond {self.n}")
                if a in ("X", "Y"):
                    flip |= 1 << q
                if a in ("Y", "Z"):
                    sign_mask |= 1 << q
                n_y += a == "Y"
            groups.setdefault(flip, []).append((coef * (1j**n_y), sign_mask))
        self.groups = groups
        self._flips = np.array(list(groups), dtype=np.int64)
        self._weights: np.ndarray | None = None
        if groups and len(groups) * (1 << self.n) <= _COMPILE_LIMIT:
            self._weights = np.stack([self._weight(f) for f in groups])
        flat = [(f, m, c) for f, members in groups.items() for c, m in members]
        self._terms = (
            np.array([f for f, _, _ in flat], dtype=np.int64),
            np.array([m for _, m, _ in flat], dtype=np.int64),
            np.array([c for _, _, c in flat], dtype=complex),
        )

    def _weight(self, flip: int) -> np.ndarray:
        w = np.zeros(1 << self.n, dtype=complex)
        for factor, mask in self.groups[flip]:
            w += factor * _parity_sign(self._idx & mask)
        return w

    def value(self, psi: np.ndarray) -> complex:
        psi = np.ascontiguousarray(psi, dtype=complex)
        if self._weights is not None:
            return _kernels.grouped_expectation(psi, self._flips, self._weights) + self.ham.offset
        return _kernels.term_expectation(psi, *self._terms) + self.ham.offset


def expectation_complex(state: np.ndarray, ham: PauliHamiltonian | CompiledHamiltonian) -> complex:
    comp = ham if isinstance(ham, CompiledHamiltonian) else CompiledHamiltonian(ham)
    if comp.n != n_qubits_of(state):
        raise ValueError(f"Hamiltonian on {comp.n} qubits, state on {n_qubits_of(state)}")
    return comp.value(state)


def expectation(state: np.ndarray, ham: PauliHamiltonian | CompiledHamiltonian) -> float:
    return float(expectation_complex(state, ham).real)


def single_pauli_expectations(state: np.ndarray) -> np.ndarray:
    """``<X_q>, <Y_q>, <Z_q>`` for every qubit, shape ``(n, 3)``."""
    n = n_qubits_of(state)
    out = np.zeros((n, 3))
    for q in range(n):
        psi = state.reshape(1 << (n - q - 1), 2, 1 << q)
        a, b = psi[:, 0, :], psi[:, 1, :]
        cross = np.vdot(a, b)  # sum conj(a) b
        out[q, 0] = 2 * cross.real
        out[q, 1] = 2 * cross.imag
        out[q, 2] = np.vdot(a, a).real - np.vdot(b, b).real
    return out


# ---------------------------------------------------------------------------
# measurement


def probabilities_in_bases(state: np.ndarray, bases: Sequence[np.ndarray | None]) -> np.ndarray:
    """Outcome distribution when qubit ``q`` is measured in the orthonormal
    basis given by the columns of ``bases[q]`` (``None`` = computational)."""
    psi = state
    for q, basis in enumerate(bases):
        if basis is not None:
            psi = apply_1q(psi, np.asarray(basis).conj().T, q)
    p = np.abs(psi) ** 2
    return p / p.sum()


def sample_outcomes(state: np.ndarray, bases: Sequence[np.ndarray | None], shots: int, rng) -> np.ndarray:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = probabilities_in_bases(state, bases)
    return rng.choice(p.size, size=shots, p=p)


def sample(state: np.ndarray, bases: Sequence[np.ndarray | None] | None, shots: int, seed=0) -> dict[int, int]:
    """Outcome counts keyed by integer outcome (bit q = qubit q)."""
    n = n_qubits_of(state)
    bases = [None] * n if bases is None else list(bases)
    rng = np.random.default_rng(seed)
    values, counts = np.unique(sample_outcomes(state, bases, shots, rng), return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def sample_product_bases(
    state: np.ndarray, bases: Sequence[np.ndarray], choices: np.ndarray, rng
) -> np.ndarray:
    """One shot per row of ``choices``: qubit ``q`` of shot ``k`` is measured in
    ``bases[choices[k, q]]``. Returns the ``(shots, n)`` outcome bits.

    Qubits are measured in order 0..n-1; shots that agree on all bases and
    outcomes so far share the collapsed state, which halves per qubit.
    """
    n = n_qubits_of(state)
    choices = np.asarray(choices)
    shots = choices.shape[0]
    out = np.zeros((shots, n), dtype=np.int8)
    adjoints = [np.asarray(b).conj().T for b in bases]

    def descend(psi: np.ndarray, q: int, rows: np.ndarray) -> None:
        if q == n or rows.size == 0:
            return
        pairs = psi.reshape(-1, 2).T  # current qubit is the lowest bit
        for b in np.unique(choices[rows, q]):
            sel = rows[choices[rows, q] == b]
            rotated = adjoints[b] @ pairs
            p1 = float(np.vdot(rotated[1], rotated[1]).real)
            p0 = float(np.vdot(rotated[0], rotated[0]).real)
            p1 = p1 / (p0 + p1)
            hits = rng.random(sel.size) < p1
            out[sel, q] = hits
            for outcome, group in ((0, sel[~hits]), (1, sel[hits])):
                if group.size == 0:
                    continue
                branch = rotated[outcome]
                norm = math.sqrt(float(np.vdot(branch, branch).real))
                descend(branch / norm, q + 1, group)

    descend(np.asarray(state, dtype=complex), 0, np.arange(shots))
    return out


def bits_of(outcome: int, n: int) -> tuple[int, ...]:
    return tuple((outcome >> q) & 1 for q in range(n))


def dense_matrix(ham: PauliHamiltonian) -> np.ndarray:
    """Full matrix, for small-n checks only."""
    from .qrac import I2, PAULI

    n = ham.n_qubits
    total = np.eye(1 << n, dtype=complex) * ham.offset
    for coef, string in ham.terms:
        ops = {q: PAULI[a] for q, a in string}
        m = np.array([[1.0 + 0j]])
        for q in reversed(range(n)):  # highest qubit is the leftmost factor
            m = np.kron(m, ops.get(q, I2))
        total += coef * m
    return total
