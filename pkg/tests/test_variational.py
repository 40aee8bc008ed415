
import numpy as np
import pytest

from conftest import bits_of
from qrelax.encode import PauliHamiltonian, encode_program
from qrelax.model import IntegerProgram, MkpInstance, Variable, build_mkp, evaluate, generate_mkp
from qrelax.oracle import solve_exact
from qrelax.rounding import RoundingConfig
from qrelax.sim import AnsatzSpec, CapacityError, Circuit, build_ansatz, dense_matrix
from qrelax.variational import MAXIMIZE, MINIMIZE, OptimizerConfig, optimize, qaoa_cost, run_qaoa, run_qrao

Z0 = PauliHamiltonian(1, ((1.0, ((0, "Z"),)),))


def single_rx():
    circ = Circuit(1)
    circ.add("RX", (0,))
    return circ


def test_minimizing_z_with_one_rotation():
    res = optimize(single_rx(), Z0, OptimizerConfig(max_evals=200, restarts=1), MINIMIZE)
    assert res.best_value == pytest.approx(-1.0, abs=1e-5)
    neg = PauliHamiltonian(1, ((-1.0, ((0, "Z"),)),))
    assert optimize(single_rx(), neg, OptimizerConfig(max_evals=200, restarts=1), MAXIMIZE).best_value == pytest.approx(1.0, abs=1e-5)


def test_parameter_free_circuit_is_evaluated_once():
    res = optimize(Circuit(1), Z0, OptimizerConfig())
    assert res.eval_count == 1 and res.best_value == pytest.approx(1.0)


def test_budget_and_incumbents():
    circ = build_ansatz(AnsatzSpec("brickwork", 2), 3)
    ham = PauliHamiltonian(3, ((1.0, ((0, "X"), (1, "Z"))), (0.5, ((2, "Y"),))))
    cfg = OptimizerConfig(max_evals=30, restarts=2, seed=4)
    res = optimize(circ, ham, cfg)
    assert res.eval_count <= 60
    inc = res.incumbents()
    assert all(b >= a for a, b in zip(inc, inc[1:]))
    assert inc[-1] == pytest.approx(res.best_value)
    again = optimize(circ, ham, cfg)
    assert again.best_value == res.best_value
    assert np.array_equal(again.best_params, res.best_params)


def test_optimizer_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(max_evals=0)
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValueError):
        optimize(single_rx(), Z0, OptimizerConfig(), "sideways")


def test_qaoa_single_variable():
    ip = IntegerProgram("maximize", {0: 5}, [], [Variable(0, "x")])
    out = run_qaoa(ip, layers=1, optimizer=OptimizerConfig(max_evals=100, restarts=1), shots=256)
    assert out.feasible and out.assignment == {0: 1} and out.objective == 5
    assert out.qubits == 1


def test_qaoa_capacity_error_names_counts():
    ip = build_mkp(generate_mkp(0, (3, 3), (3, 3)))
    enc = encode_program(ip, "qaoa")
    with pytest.raises(CapacityError, match=f"{enc.qubit_count} qubits.*{ip.n} program variables"):
        run_qaoa(ip, cap=4)


def test_qaoa_cost_is_scaled_negation():
    enc = encode_program(build_mkp(MkpInstance((3, 2), (1, 1), (1,))), "qaoa")
    cost = qaoa_cost(enc)
    assert max(abs(c) for c, _ in cost.terms) == pytest.approx(1.0)
    ratio = cost.terms[0][0] / enc.hamiltonian.terms[0][0]
    assert ratio < 0
    assert all(c == pytest.approx(ratio * h) for (c, _), (h, _) in zip(cost.terms, enc.hamiltonian.terms))


def test_qrao_capacity():
    ip = build_mkp(generate_mkp(0, (3, 3), (3, 3)))
    with pytest.raises(CapacityError):
        run_qrao(ip, cap=1)


@pytest.mark.parametrize("seed", range(3))
def test_relaxed_maximum_bounds_the_qubo_maximum(seed):
    ip = build_mkp(generate_mkp(seed, (1, 1), (2, 3)))
    enc = encode_program(ip)
    assert enc.qubit_count <= 10 and enc.qubo.n <= 16
    top = np.linalg.eigvalsh(dense_matrix(enc.hamiltonian)).max()
    best = max(float(enc.qubo.value(bits_of(k, enc.qubo.n))) for k in range(1 << enc.qubo.n))
    assert top >= best - 1e-9


def test_qrao_end_to_end_on_small_mkp():
    ip = build_mkp(generate_mkp(2, (2, 2), (2, 3)))
    opt = solve_exact(ip).optimum
    out = run_qrao(ip, AnsatzSpec("brickwork", 2), OptimizerConfig(max_evals=150, restarts=1),
                   (RoundingConfig("pauli"), RoundingConfig("magic", 256, 0)))
    assert set(out.schemes) == {"pauli", "magic"}
    assert out.feasible
    assert evaluate(ip, out.assignment).objective == out.objective <= opt
    assert sum(out.diagnostics["magic_basis_histogram"]) == 256 * out.qubits
    for s in out.schemes.values():
        if s.feasible:
            assert s.objective <= out.objective
