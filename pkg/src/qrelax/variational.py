"""Variational loop and the two end-to-end solvers (QRAO and QAOA)."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .encode import Encoding, PauliHamiltonian, encode_program
from .model import IntegerProgram
from .rounding import (
    RoundingConfig,
    Selection,
    basis_histogram,
    magic_round,
    pauli_round,
    select_best,
)
from .sim import (
    MAX_QUBITS,
    AnsatzSpec,
    CapacityError,
    Circuit,
    CompiledHamiltonian,
    build_ansatz,
    check_capacity,
    expectation,
    sample,
    bits_of,
)

log = logging.getLogger(__name__)

MAXIMIZE = "maximize"
MINIMIZE = "minimize"


@dataclass(frozen=True)
class OptimizerConfig:
    """COBYLA settings; ``max_evals`` is the budget of each restart."""

    max_evals: int = 1000
    rhobeg: float = 0.5
    tol: float = 1e-6
    seed: int = 0
    restarts: int = 3

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class VariationalResult:
    best_params: np.ndarray
    best_value: float
    eval_count: int
    trace: list[tuple[int, float]]
    exhausted: bool = False

    def incumbents(self, sense: str = MAXIMIZE) -> list[float]:
        best, out = None, []
        for _, v in self.trace:
            if best is None or (v > best if sense == MAXIMIZE else v < best):
                best = v
            out.append(best)
        return out


class _Budget(Exception):
    pass


def optimize(circuit: Circuit, ham, config: OptimizerConfig, sense: str = MAXIMIZE) -> VariationalResult:
    """Best expectation of ``ham`` over the circuit parameters.

    Each restart draws its start uniformly from [-pi, pi) and runs COBYLA
    for at most ``config.max_evals`` evaluations.
    """
    if sense not in (MAXIMIZE, MINIMIZE):
        raise ValueError(f"unknown sense {sense!r}")
    comp = ham if isinstance(ham, CompiledHamiltonian) else CompiledHamiltonian(ham)
    sign = -1.0 if sense == MAXIMIZE else 1.0
    trace: list[tuple[int, float]] = []
    best = {"value": None, "params": np.zeros(circuit.n_params)}

    def record(theta) -> float:
        value = expectation(circuit.run(theta), comp)
        trace.append((len(trace), value))
        if best["value"] is None or sign * value < sign * best["value"]:
            best["value"], best["params"] = value, np.array(theta, dtype=float)
        return value

    if circuit.n_params == 0:
        record(np.zeros(0))
        return VariationalResult(best["params"], best["value"], 1, trace)

    exhausted = False
    for restart in range(config.restarts):
        rng = np.random.default_rng([config.seed, restart])
        x0 = rng.uniform(-math.pi, math.pi, circuit.n_params)
        used = 0

        def objective(theta):
            nonlocal used
            if used >= config.max_evals:
                raise _Budget
            used += 1
            return sign * record(theta)

        try:
            res = minimize(
                objective,
                x0,
                method="COBYLA",
                options={"maxiter": config.max_evals, "rhobeg": config.rhobeg, "tol": config.tol},
            )
            exhausted |= not res.success and used >= config.max_evals
        except _Budget:
            exhausted = True
    return VariationalResult(best["params"], best["value"], len(trace), trace, exhausted)


# ---------------------------------------------------------------------------
# end-to-end solvers


@dataclass
class SchemeResult:
    scheme: str
    assignment: dict[int, int] | None
    objective: Fraction | None
    feasible: bool
    n_candidates: int
    n_feasible: int


@dataclass
class SolveOutcome:
    method: str
    assignment: dict[int, int] | None
    objective: Fraction | None
    feasible: bool
    qubits: int
    n_variables: int  # QUBO variables, slack included
    relaxed_value: float | None
    evals: int
    schemes: dict[str, SchemeResult] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


def _scheme_result(name: str, sel: Selection) -> SchemeResult:
    return SchemeResult(name, sel.assignment, sel.objective, sel.feasible, sel.n_candidates, sel.n_feasible)


def _lifter(enc: Encoding, lift: Callable | None):
    def run(bits):
        sol = enc.decode(bits)
        return lift(sol) if lift is not None else sol

    return run


def run_qrao(
    ip: IntegerProgram,
    ansatz: AnsatzSpec | None = None,
    optimizer: OptimizerConfig | None = None,
    rounding: Sequence[RoundingConfig] = (RoundingConfig("pauli"), RoundingConfig("magic")),
    original: IntegerProgram | None = None,
    lift: Callable[[Mapping[int, int]], dict[int, int]] | None = None,
    cap: int = MAX_QUBITS,
    encoding: Encoding | None = None,
) -> SolveOutcome:
    """Relax ``ip`` onto (3,1)-QRAC qubits, optimize, round, and keep the best
    candidate over all rounding schemes, judged on ``original`` after ``lift``."""
    ansatz = ansatz or AnsatzSpec("brickwork", 8)
    optimizer = optimizer or OptimizerConfig()
    original = original or ip
    enc = encoding or encode_program(ip, "qrao")
    check_capacity(enc.qubit_count, cap)
    to_original = _lifter(enc, lift)

    if enc.qubit_count == 0:
        sel = select_best([{}], original, to_original)
        schemes = {r.scheme: _scheme_result(r.scheme, sel) for r in rounding}
        return SolveOutcome("qrao", sel.assignment, sel.objective, sel.feasible, 0, 0,
                            float(enc.hamiltonian.offset), 0, schemes)

    circuit = build_ansatz(ansatz, enc.qubit_count)
    result = optimize(circuit, enc.hamiltonian, optimizer, MAXIMIZE)
    state = circuit.run(result.best_params)

    schemes: dict[str, SchemeResult] = {}
    selections: list[Selection] = []
    diagnostics: dict = {"optimizer_exhausted": result.exhausted}
    for cfg in rounding:
        if cfg.scheme == "pauli":
            rounded = [pauli_round(state, enc.layout, cfg)]
            diagnostics["pauli_expectations"] = {
                int(k): round(v, 12) for k, v in rounded[0].expectations.items()
            }
        else:
            rounded = magic_round(state, enc.layout, cfg)
            diagnostics["magic_basis_histogram"] = basis_histogram(rounded)
        sel = select_best([r.bits for r in rounded], original, to_original)
        schemes[cfg.scheme] = _scheme_result(cfg.scheme, sel)
        selections.append(sel)

    best = _best_of(selections, original)
    return SolveOutcome(
        "qrao",
        best.assignment,
        best.objective,
        best.feasible,
        enc.qubit_count,
        enc.qubo.n,
        result.best_value,
        result.eval_count,
        schemes,
        diagnostics,
    )


def _best_of(selections: Sequence[Selection], original: IntegerProgram) -> Selection:
    sign = 1 if original.sense == MAXIMIZE else -1
    feasible = [s for s in selections if s.feasible]
    if feasible:
        return max(feasible, key=lambda s: sign * s.objective)
    return selections[0]


def qaoa_cost(enc: Encoding) -> PauliHamiltonian:
    """Minimization cost ``-H`` scaled to unit largest coefficient."""
    ham = enc.hamiltonian
    scale = max((abs(c) for c, _ in ham.terms), default=1.0) or 1.0
    terms = tuple((-c / scale, s) for c, s in ham.terms)
    return PauliHamiltonian(ham.n_qubits, terms, -ham.offset / scale)


def run_qaoa(
    ip: IntegerProgram,
    layers: int = 5,
    optimizer: OptimizerConfig | None = None,
    shots: int = 4096,
    seed: int = 0,
    original: IntegerProgram | None = None,
    lift: Callable[[Mapping[int, int]], dict[int, int]] | None = None,
    cap: int = MAX_QUBITS,
    encoding: Encoding | None = None,
) -> SolveOutcome:
    optimizer = optimizer or OptimizerConfig()
    original = original or ip
    enc = encoding or encode_program(ip, "qaoa")
    n = enc.qubit_count
    if n > cap:
        raise CapacityError(f"QAOA needs {n} qubits ({enc.source.n} program variables), cap is {cap}")
    to_original = _lifter(enc, lift)
    if n == 0:
        sel = select_best([{}], original, to_original)
        return SolveOutcome("qaoa", sel.assignment, sel.objective, sel.feasible, 0, 0, None, 0,
                            {"sample": _scheme_result("sample", sel)})

    cost = qaoa_cost(enc)
    circuit = build_ansatz(AnsatzSpec("qaoa", layers), n, cost=cost)
    result = optimize(circuit, cost, optimizer, MINIMIZE)
    state = circuit.run(result.best_params)
    counts = sample(state, None, shots, seed)
    candidates = [dict(enumerate(bits_of(outcome, n))) for outcome in sorted(counts)]
    sel = select_best(candidates, original, to_original)
    return SolveOutcome(
        "qaoa",
        sel.assignment,
        sel.objective,
        sel.feasible,
        n,
        enc.qubo.n,
        expectation(state, enc.hamiltonian),
        result.eval_count,
        {"sample": _scheme_result("sample", sel)},
        {"optimizer_exhausted": result.exhausted, "distinct_samples": len(counts)},
    )
