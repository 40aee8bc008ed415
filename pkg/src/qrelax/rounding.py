"""Recovering classical bits from a relaxed state: Pauli and magic rounding."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .encode import QubitLayout, auto_penalty
from .model import MAXIMIZE, Evaluation, IntegerProgram, ModelError, evaluate
from .qrac import AXIS_INDEX, magic_bases
from .sim import n_qubits_of, sample_product_bases, single_pauli_expectations

TIE_TOL = 1e-12


@dataclass(frozen=True)
class RoundingConfig:
    scheme: str = "magic"
    shots: int = 1024
    seed: int = 0
    tie_rule: str = "zero"

    def __post_init__(self):
        if self.scheme not in ("pauli", "magic"):
            raise ValueError(f"unknown rounding scheme {self.scheme!r}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.tie_rule not in ("zero", "random"):
            raise ValueError(f"unknown tie rule {self.tie_rule!r}")


@dataclass(frozen=True)
class RoundedSolution:
    bits: dict[int, int]
    source: str
    expectations: dict[int, float] | None = None  # pauli: <P_i> per variable
    bases: tuple[int, ...] | None = None  # magic: basis index per qubit

    def vector(self, n: int) -> tuple[int, ...]:
        return tuple(self.bits[i] for i in range(n))


def _check(state: np.ndarray, layout: QubitLayout) -> None:
    if layout.qubit_count and n_qubits_of(state) != layout.qubit_count:
        raise ValueError(f"state has {n_qubits_of(state)} qubits, layout {layout.qubit_count}")


def pauli_round(state: np.ndarray, layout: QubitLayout, config: RoundingConfig | None = None) -> RoundedSolution:
    """Bit ``i`` is 0 when ``<P_i> > 0`` and 1 when negative (exact expectations)."""
    config = config or RoundingConfig("pauli")
    _check(state, layout)
    rng = np.random.default_rng(config.seed)
    table = single_pauli_expectations(state) if layout.qubit_count else np.zeros((0, 3))
    bits, exps = {}, {}
    for v, (q, axis) in layout.assignment.items():
        e = float(table[q, AXIS_INDEX[axis]])
        exps[v] = e
        if e > TIE_TOL:
            bits[v] = 0
        elif e < -TIE_TOL:
            bits[v] = 1
        else:
            bits[v] = 0 if config.tie_rule == "zero" else int(rng.integers(2))
    return RoundedSolution(bits, "pauli", expectations=exps)


def magic_round(state: np.ndarray, layout: QubitLayout, config: RoundingConfig | None = None) -> list[RoundedSolution]:
    """One candidate per shot; each qubit is measured in one of the four magic
    bases drawn uniformly and decoded to three bits at once."""
    config = config or RoundingConfig("magic")
    _check(state, layout)
    rng = np.random.default_rng(config.seed)
    bases = magic_bases()
    n = layout.qubit_count
    if n == 0:
        return [RoundedSolution({}, "magic", bases=()) for _ in range(config.shots)]
    choices = rng.integers(0, len(bases), size=(config.shots, n))
    outcomes = sample_product_bases(state, [b.vectors for b in bases], choices, rng)
    out = []
    for k in range(config.shots):
        decoded = [bases[choices[k, q]].decode(int(outcomes[k, q])) for q in range(n)]
        bits = {v: decoded[q][AXIS_INDEX[axis]] for v, (q, axis) in layout.assignment.items()}
        out.append(RoundedSolution(bits, "magic", bases=tuple(int(c) for c in choices[k])))
    return out


def basis_histogram(solutions: Sequence[RoundedSolution]) -> list[int]:
    counts = [0, 0, 0, 0]
    for sol in solutions:
        for b in sol.bases or ():
            counts[b] += 1
    return counts


@dataclass(frozen=True)
class Selection:
    assignment: dict[int, int] | None
    objective: Fraction | None
    feasible: bool
    index: int
    evaluation: Evaluation | None = None
    n_candidates: int = 0
    n_feasible: int = 0


def select_best(
    candidates: Sequence[Mapping[int, int]],
    original: IntegerProgram,
    lift: Callable[[Mapping[int, int]], dict[int, int]] = dict,
) -> Selection:
    """Lift every candidate to ``original`` and keep the best feasible one by
    objective (first wins ties). Without a feasible candidate, return the one
    with the best penalized objective, flagged infeasible.

    A candidate whose lift leaves the variable box (a violated binarization
    bound row) cannot be evaluated and ranks below every other candidate; if
    all candidates are like that the selection has no assignment.
    """
    if not candidates:
        raise ValueError("select_best needs at least one candidate")
    sign = 1 if original.sense == MAXIMIZE else -1
    M = auto_penalty(original)
    seen: dict[tuple, tuple[dict[int, int], Evaluation | None]] = {}
    best_feasible = best_penalized = None
    n_feasible = 0
    for idx, cand in enumerate(candidates):
        key = tuple(sorted(cand.items()))
        if key not in seen:
            assignment = lift(cand)
            try:
                seen[key] = (assignment, evaluate(original, assignment))
            except ModelError:
                seen[key] = (assignment, None)
        assignment, ev = seen[key]
        if ev is None:
            continue
        if ev.feasible:
            n_feasible += 1
            score = sign * ev.objective
            if best_feasible is None or score > best_feasible[0]:
                best_feasible = (score, idx, assignment, ev)
        else:
            score = sign * ev.objective - M * ev.violation_total
            if best_penalized is None or score > best_penalized[0]:
                best_penalized = (score, idx, assignment, ev)
    chosen = best_feasible or best_penalized
    if chosen is None:
        return Selection(None, None, False, 0, None, len(candidates), 0)
    _, idx, assignment, ev = chosen
    return Selection(
        assignment, ev.objective, best_feasible is not None, idx, ev, len(candidates), n_feasible
    )
