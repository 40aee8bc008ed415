"""The (3,1,p)-QRAC: three bits in one qubit, decodable with p = 1/2 + 1/(2 sqrt 3)."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

I2 = np.eye(2, dtype=complex)
PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
AXIS_INDEX = {"X": 0, "Y": 1, "Z": 2}

SUCCESS_PROBABILITY = 0.5 + 1.0 / (2.0 * math.sqrt(3.0))
THETA = math.acos(math.sqrt(SUCCESS_PROBABILITY))

# phase of the |1> amplitude, keyed by (x1, x2)
_PHASES = {(0, 0): 1, (0, 1): -1, (1, 0): 3, (1, 1): -3}


@dataclass(frozen=True)
class QracState:
    bits: tuple[int, int, int]
    density: np.ndarray
    statevector: np.ndarray

    @property
    def bloch(self) -> np.ndarray:
        return np.array([np.trace(PAULI[a] @ self.density).real for a in "XYZ"])


def bloch_vector(bits) -> np.ndarray:
    return np.array([(-1) ** b for b in bits], dtype=float) / math.sqrt(3.0)


def density(bits) -> np.ndarray:
    r = bloch_vector(bits)
    return 0.5 * (I2 + r[0] * PAULI["X"] + r[1] * PAULI["Y"] + r[2] * PAULI["Z"])


def statevector(bits) -> np.ndarray:
    """Closed-form pure state; the |0> amplitude is real and nonnegative."""
    x1, x2, x3 = bits
    phase = np.exp(1j * math.pi * _PHASES[(x1, x2)] / 4)
    c, s = math.cos(THETA), math.sin(THETA)
    if x3 == 0:
        return np.array([c, phase * s], dtype=complex)
    return np.array([s, phase * c], dtype=complex)


def encode(bits) -> QracState:
    bits = tuple(int(b) for b in bits)
    if len(bits) != 3 or any(b not in (0, 1) for b in bits):
        raise ValueError(f"expected three bits, got {bits}")
    return QracState(bits, density(bits), statevector(bits))


@dataclass(frozen=True)
class Povm:
    axis: str
    effects: tuple[np.ndarray, np.ndarray]


def povm(axis: str) -> Povm:
    P = PAULI[axis]
    return Povm(axis, ((I2 + P) / 2, (I2 - P) / 2))


def decode_probability(state, axis: str, bit: int) -> float:
    rho = state.density if isinstance(state, QracState) else np.asarray(state)
    return float(np.trace(povm(axis).effects[bit] @ rho).real)


ALL_BITS = tuple(itertools.product((0, 1), repeat=3))


@dataclass(frozen=True)
class MagicBasis:
    label: tuple[int, int, int]  # decoded bits for outcome 0; outcome 1 decodes the complement
    vectors: np.ndarray  # columns are the basis states

    def decode(self, outcome: int) -> tuple[int, int, int]:
        if outcome == 0:
            return self.label
        return tuple(1 - b for b in self.label)


def magic_bases() -> tuple[MagicBasis, ...]:
    """Four bases from antipodal QRAC pairs ``{psi(b), psi(not b)}``, labelled by
    the member with ``b1 = 0``."""
    bases = []
    for label in ALL_BITS:
        if label[0] != 0:
            continue
        comp = tuple(1 - b for b in label)
        vecs = np.column_stack([statevector(label), statevector(comp)])
        bases.append(MagicBasis(label, vecs))
    return tuple(bases)
