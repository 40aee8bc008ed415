"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line."""
import collections
import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import bits_of
from qrelax import qrac
from qrelax.cli import main as cli_main
from qrelax.encode import (
    IsingHamiltonian,
    binarize,
    PauliHamiltonian,
    assign_qubits,
    build_instance_graph,
    color_ldf,
    encode_program,
    relax_hamiltonian,
)
from qrelax.harness import ExperimentConfig, derive_seed, run_experiment
from qrelax.model import build_mkp, build_procurement, evaluate, generate_mkp, generate_procurement
from qrelax.oracle import solve_exact
from qrelax.presolve import solve_lp
from qrelax.rounding import RoundingConfig, magic_round, pauli_round
from qrelax.sim import AnsatzSpec, Circuit, build_ansatz, dense_matrix, expectation

MASTER = 2024


@pytest.fixture
def verdict(capsys):
    def report(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nCRITERION {number:2d} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return report


def product_state(per_qubit_bits):
    psi = np.array([1.0 + 0j])
    for bits in per_qubit_bits:
        psi = np.kron(qrac.statevector(bits), psi)  # qubit 0 is the lowest index bit
    return psi


def qrac_state_of(x, layout):
    per_qubit = [[0, 0, 0] for _ in range(layout.qubit_count)]
    for v, (q, axis) in layout.assignment.items():
        per_qubit[q]["XYZ".index(axis)] = x[v]
    return product_state(per_qubit)


def test_criterion_01_qrac_fidelity(verdict):
    start = time.perf_counter()
    worst_p = worst_rho = 0.0
    for bits in itertools.product((0, 1), repeat=3):
        st = qrac.encode(bits)
        for axis, b in zip("XYZ", bits):
            worst_p = max(worst_p, abs(qrac.decode_probability(st, axis, b) - (0.5 + 1 / (2 * math.sqrt(3)))))
        rho = np.outer(st.statevector, st.statevector.conj())
        worst_rho = max(worst_rho, float(np.abs(rho - st.density).max()))
    elapsed = time.perf_counter() - start
    ok = worst_p <= 1e-12 and worst_rho <= 1e-12 and elapsed < 1
    verdict(1, ok, f"max decode error {worst_p:.1e}, max density error {worst_rho:.1e}, {elapsed:.3f}s")


def test_criterion_02_commutative_map(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(MASTER)
    worst, strings = 0.0, 0
    for _ in range(50):
        n = int(rng.integers(1, 10))
        h = {i: Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 4))) for i in range(n)}
        J = {(i, j): Fraction(int(rng.integers(-9, 10))) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4}
        ising = IsingHamiltonian(n, h, {k: v for k, v in J.items() if v}, Fraction(int(rng.integers(-5, 6))))
        layout = assign_qubits(color_ldf(build_instance_graph(ising)))
        ham = relax_hamiltonian(ising, layout)
        for k in range(1 << n):
            x = bits_of(k, n)
            worst = max(worst, abs(expectation(qrac_state_of(x, layout), ham) - float(ising.value_bits(x))))
            strings += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 60
    verdict(2, ok, f"{strings} bitstrings over 50 instances, max deviation {worst:.1e}, {elapsed:.1f}s")


def test_criterion_03_penalty_oracle_equivalence(verdict):
    start = time.perf_counter()
    checked, failures, seed = 0, [], 0
    while checked < 50:
        ip = build_mkp(generate_mkp(derive_seed(MASTER, 3, seed), (2, 3), (2, 3)))
        seed += 1
        enc = encode_program(ip, "qaoa")
        q = enc.qubo
        if q.n > 16:
            continue
        X = (np.arange(1 << q.n)[:, None] >> np.arange(q.n)) & 1
        best = X[int(np.argmax(q.values(X)))]
        decoded = enc.decode(best)
        ev = evaluate(ip, decoded)
        opt = solve_exact(ip).optimum
        if not (ev.feasible and ev.objective == opt):
            failures.append(seed - 1)
        checked += 1
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 300
    verdict(3, ok, f"{checked - len(failures)}/{checked} QUBO argmaxes feasible and optimal, {elapsed:.1f}s")


def test_criterion_04_lp_bound(verdict):
    violations, count = [], 0
    for k in range(50):
        ip = build_mkp(generate_mkp(derive_seed(MASTER, 4, k), (2, 5), (2, 10)))
        lp, opt = solve_lp(ip), solve_exact(ip)
        count += 1
        if not lp.objective >= float(opt.optimum) - 1e-9:
            violations.append(("mkp", k))
    for k in range(50):
        ip = build_procurement(generate_procurement(derive_seed(MASTER, 40, k), d_range=(2, 3), max_binary=126))
        lp, opt = solve_lp(binarize(ip)[0]), solve_exact(ip)
        count += 1
        if not lp.objective <= float(opt.optimum) + 1e-9:
            violations.append(("procurement", k))
    verdict(4, not violations, f"{count - len(violations)}/{count} LP bounds hold (50 MKP maximize, 50 procurement minimize)")


def test_criterion_05_rounding_recovery(verdict):
    pauli_bad = 0
    total = 0
    for n in range(1, 10):
        layout = assign_qubits({v: 0 for v in range(n)})
        for k in range(1 << n):
            x = tuple(bits_of(k, n))
            total += 1
            pauli_bad += pauli_round(qrac_state_of(x, layout), layout).vector(n) != x
    layout = assign_qubits({v: 0 for v in range(9)})
    per_bit = per_qubit = joint = 0
    failures = []
    for k in range(1 << 9):
        x = tuple(bits_of(k, 9))
        sols = magic_round(qrac_state_of(x, layout), layout, RoundingConfig("magic", 256, derive_seed(MASTER, 5, k)))
        shots = np.array([s.vector(9) for s in sols])
        bitwise = tuple(int(v) for v in (shots.mean(axis=0) > 0.5))
        per_bit += bitwise == x
        if bitwise != x:
            failures.append(x)
        per_qubit += all(
            collections.Counter(map(tuple, shots[:, 3 * q : 3 * q + 3])).most_common(1)[0][0] == x[3 * q : 3 * q + 3]
            for q in range(3)
        )
        joint += collections.Counter(map(tuple, shots)).most_common(1)[0][0] == x
    rate = per_bit / 512
    ok = pauli_bad == 0 and rate >= 0.95
    detail = (f"pauli {total - pauli_bad}/{total} exact; magic per-bit modal {per_bit}/512 ({rate:.1%}), "
              f"per-qubit modal {per_qubit}/512, whole-string modal {joint}/512; failures {failures[:5]}")
    verdict(5, ok, detail)


def test_criterion_06_qubit_compression(verdict):
    ratios, worse = [], 0
    for k in range(100):
        ip = build_mkp(generate_mkp(derive_seed(MASTER, 6, k), (2, 5), (2, 10)))
        qa, qr = encode_program(ip, "qaoa").qubit_count, encode_program(ip, "qrao").qubit_count
        worse += qr > qa
        ratios.append(qr / qa)
    mean = float(np.mean(ratios))
    verdict(6, worse == 0 and mean <= 0.5, f"QRAO above QAOA on {worse}/100 instances, mean ratio {mean:.3f}")


def _agg(report, key, value):
    return next(a for a in report.aggregates if a[key] == value)


@pytest.mark.slow
def test_criterion_07_mkp_comparison(verdict, tmp_path):
    start = time.perf_counter()
    cfg = ExperimentConfig.for_experiment("mkp", seed=MASTER, instances=20, bins_range=(3, 3), items_range=(3, 3),
                                          methods=("qrao",), plot=False)
    report = run_experiment(cfg)
    report.write(tmp_path)
    elapsed = time.perf_counter() - start
    magic, pauli = _agg(report, "method", "qrao+magic"), _agg(report, "method", "qrao+pauli")
    within_cap = magic["skipped"] == 0
    mg = magic["mean_gap"] if magic["mean_gap"] is not None else math.inf
    pg = pauli["mean_gap"] if pauli["mean_gap"] is not None else math.inf
    ok = report.completed and within_cap and magic["feasible_pct"] >= 80 and mg <= 0.20 and mg <= pg and elapsed < 1800
    verdict(7, ok, f"magic feasible {magic['feasible_pct']:.0f}% gap {mg:.3f}; pauli feasible "
                   f"{pauli['feasible_pct']:.0f}% gap {pg:.3f}; {elapsed:.0f}s")


@pytest.mark.slow
def test_criterion_08_lr_pipeline(verdict, tmp_path):
    start = time.perf_counter()
    cfg = ExperimentConfig.for_experiment("lr", seed=MASTER, instances=10, policies=("percent:0.85",))
    report = run_experiment(cfg)
    report.write(tmp_path)
    elapsed = time.perf_counter() - start
    rows = report.rows
    sizes_ok = all(r["n_binary"] >= 100 for r in rows)
    residual = max(r.get("residual_vars", math.inf) for r in rows)
    feasible = [r for r in rows if r["feasible"]]
    checked = 0
    for r in feasible:
        inst = generate_procurement(r["seed"], cfg.suppliers, cfg.parts, cfg.d_range, max_binary=cfg.max_binary)
        ev = evaluate(build_procurement(inst), dict(enumerate(r["assignment"])))
        checked += ev.feasible and str(ev.objective) == r["objective"]
    rate = len(feasible) / len(rows)
    statuses = collections.Counter(r["status"] for r in rows)
    ok = (report.completed and sizes_ok and residual <= 18 and rate >= 0.5 and checked == len(feasible)
          and elapsed < 1800)
    verdict(8, ok, f"residual max {residual}, feasible {len(feasible)}/{len(rows)} ({rate:.0%}), "
                   f"{checked}/{len(feasible)} pass exact evaluation, statuses {dict(statuses)}, {elapsed:.0f}s")


BENCH_COMMANDS = {
    "mkp": ["--instances", "3", "--max-evals", "60", "--restarts", "1"],
    "lr": ["--instances", "2", "--max-evals", "40", "--layers", "2"],
    "ansatz": ["--instances", "1", "--max-evals", "15", "--restarts", "1"],
}


def test_criterion_09_determinism(verdict, tmp_path):
    identical = []
    for name, extra in BENCH_COMMANDS.items():
        outs = []
        for run in range(2):
            out = tmp_path / f"{name}-{run}"
            assert cli_main(["bench", "--experiment", name, "--seed", str(MASTER), "--out", str(out), "--no-plot", *extra]) == 0
            outs.append((out / "report.json").read_bytes())
        identical.append(outs[0] == outs[1])
    verdict(9, all(identical), f"byte-identical report.json for {sum(identical)}/{len(identical)} bench commands")


def test_criterion_10_simulator(verdict):
    rng = np.random.default_rng(MASTER)
    worst_exp = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 7))
        psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        psi /= np.linalg.norm(psi)
        terms = []
        for _ in range(int(rng.integers(1, 16))):
            qs = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
            terms.append((float(rng.normal()), tuple(sorted((int(q), "XYZ"[int(rng.integers(3))]) for q in qs))))
        ham = PauliHamiltonian(n, tuple(terms), float(rng.normal()))
        dense = float(np.vdot(psi, dense_matrix(ham) @ psi).real)
        worst_exp = max(worst_exp, abs(expectation(psi, ham) - dense))
    worst_norm, gates = 0.0, 0
    specs = [AnsatzSpec("brickwork", 4), AnsatzSpec("su2", 2, "full"), AnsatzSpec("pauli2design", 2, "circular"),
             AnsatzSpec("realamp", 2, "linear")]
    for spec in specs:
        for n in (2, 5, 6):
            circ = build_ansatz(spec, n)
            theta = rng.uniform(-math.pi, math.pi, circ.n_params)
            psi = None
            for op in circ.ops:
                step = Circuit(n)
                angle = op.scale * theta[op.param] if op.param is not None else op.angle
                step.add(op.gate, op.qubits, param=False, angle=angle)
                psi = step.run(state=psi)
                worst_norm = max(worst_norm, abs(np.linalg.norm(psi) - 1))
                gates += 1
    ok = worst_exp <= 1e-10 and worst_norm <= 1e-10
    verdict(10, ok, f"max expectation error {worst_exp:.1e} over 100 pairs, max norm drift {worst_norm:.1e} over {gates} gates")
