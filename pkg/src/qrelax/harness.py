"""Seeded experiment drivers: ansatz study, MKP method comparison, LR fixing.

Every run writes ``report.json`` (byte-stable for a fixed master seed, so it
carries no wall times), ``rows.csv`` (rows plus wall times) and, for the MKP
comparison, ``fig2.csv`` with paired qubit counts.
"""
from __future__ import annotations

import csv
import dataclasses
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import io
from .encode import EncodingError, binarize, encode_program
from .model import (
    IntegerProgram,
    build_mkp,
    build_procurement,
    evaluate,
    generate_mkp,
    generate_procurement,
)
from .oracle import OPTIMAL, optimality_gap, solve_exact
from .presolve import FIXING_INFEASIBLE, FixingPolicy, fix_variables, lift_solution, solve_lp
from .rounding import RoundingConfig
from .sim import AnsatzSpec
from .variational import OptimizerConfig, SolveOutcome, run_qaoa, run_qrao

log = logging.getLogger(__name__)

OPTIMAL_GAP = 5e-4  # "optimal" means gap strictly below this, everywhere
EXPERIMENTS = ("ansatz_study", "mkp_compare", "lr_procurement")
ALIASES = {"ansatz": "ansatz_study", "mkp": "mkp_compare", "lr": "lr_procurement"}

OK = "ok"
SKIPPED = "skipped"
ERROR = "error"
RESIDUAL_INFEASIBLE = "residual-infeasible"


def derive_seed(master: int, *path: int) -> int:
    """Independent 32-bit seed for one (instance, role) slot."""
    return int(np.random.SeedSequence([master, *path]).generate_state(1)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment's settings; ``for_experiment`` fills per-experiment defaults."""

    experiment: str
    instances: int
    seed: int = 0
    # QRAO
    ansatz: str = "brickwork"
    layers: int = 8
    max_evals: int = 1000
    restarts: int = 3
    rhobeg: float = 0.5
    shots: int = 1024
    schemes: tuple[str, ...] = ("pauli", "magic")
    # QAOA
    qaoa_layers: int = 5
    qaoa_shots: int = 4096
    qaoa_max_evals: int = 300
    qaoa_restarts: int = 1
    methods: tuple[str, ...] = ("qaoa", "qrao")
    solve_cap: int = 24
    oracle_budget: int = 200_000
    # ansatz study grid
    families: tuple[str, ...] = ("brickwork", "su2", "pauli2design", "realamp")
    entanglements: tuple[str, ...] = ("linear", "circular", "full")
    layer_grid: tuple[int, ...] = (0, 1, 2, 3, 4)
    # generators
    bins_range: tuple[int, int] = (2, 5)
    items_range: tuple[int, int] = (2, 10)
    suppliers: int = 5
    parts: int = 10
    d_range: tuple[int, int] = (2, 3)
    max_binary: int | None = 126
    policies: tuple[str, ...] = ("delta:0.1", "percent:0.9", "percent:0.85")
    plot: bool = True

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.instances < 1:
            raise ValueError("instances must be >= 1")
        for m in self.methods:
            if m not in ("qaoa", "qrao"):
                raise ValueError(f"unknown method {m!r}")
        for p in self.policies:
            FixingPolicy.parse(p)
        if not self.schemes:
            raise ValueError("at least one rounding scheme is needed")

    @classmethod
    def for_experiment(cls, name: str, **overrides) -> "ExperimentConfig":
        name = ALIASES.get(name, name)
        base: dict = {
            # pauli only: with 1024 magic shots every 3x3 instance is solved whatever the ansatz
            "ansatz_study": dict(instances=20, bins_range=(3, 3), items_range=(3, 3), restarts=3, schemes=("pauli",)),
            "mkp_compare": dict(instances=100, restarts=1, solve_cap=18),
            "lr_procurement": dict(instances=10, restarts=1, solve_cap=20),
        }[name]
        base.update(overrides)
        return cls(experiment=name, **base)

    def optimizer(self, seed: int) -> OptimizerConfig:
        return OptimizerConfig(max_evals=self.max_evals, rhobeg=self.rhobeg, seed=seed, restarts=self.restarts)

    def qaoa_optimizer(self, seed: int) -> OptimizerConfig:
        return OptimizerConfig(max_evals=self.qaoa_max_evals, rhobeg=self.rhobeg, seed=seed, restarts=self.qaoa_restarts)

    def rounding(self, seed: int) -> tuple[RoundingConfig, ...]:
        return tuple(RoundingConfig(s, 1 if s == "pauli" else self.shots, seed) for s in self.schemes)

    def echo(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self).items()}


TIMING_FIELDS = ("wall_time_s",)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[dict]
    group_by: tuple[str, ...]
    fig2: list[dict] | None = None
    annotations: list[str] = field(default_factory=list)

    @property
    def aggregates(self) -> list[dict]:
        return aggregate(self.rows, self.group_by)

    @property
    def completed(self) -> bool:
        """True when no row ended in an unexpected error."""
        return all(r["status"] != ERROR for r in self.rows)

    def to_dict(self) -> dict:
        rows = [{k: v for k, v in r.items() if k not in TIMING_FIELDS} for r in self.rows]
        out = {
            "experiment": self.config.experiment,
            "config": self.config.echo(),
            "optimal_threshold": OPTIMAL_GAP,
            "denominators": "feasible and optimal over non-skipped rows; mean gap over feasible rows",
            "aggregates": self.aggregates,
            "rows": rows,
            "annotations": list(self.annotations),
        }
        if self.fig2 is not None:
            out["fig2"] = self.fig2
        return out

    def to_json(self) -> str:
        return io.dumps(self.to_dict())

    def write(self, out_dir: str | Path) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "report.json", out / "rows.csv"]
        written[0].write_text(self.to_json())
        _write_csv(written[1], self.rows)
        if self.fig2 is not None:
            written.append(out / "fig2.csv")
            _write_csv(written[-1], self.fig2)
            if self.config.plot:
                svg = write_fig2_svg(self.fig2, out / "fig2.svg")
                if svg is not None:
                    written.append(svg)
        return written


def _write_csv(path: Path, rows: Sequence[dict]) -> None:
    columns: list[str] = []
    for r in rows:
        columns += [k for k in r if k not in columns]
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _csv_cell(v) for k, v in r.items()})


def _csv_cell(v):
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return "" if v is None else v


def write_fig2_svg(fig2: Sequence[dict], path: Path) -> Path | None:
    """Scatter of QRAO against QAOA qubit counts; skipped without matplotlib."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.info("matplotlib not installed; fig2.svg not written")
        return None
    x = [r["qaoa_qubits"] for r in fig2]
    y = [r["qrao_qubits"] for r in fig2]
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.scatter(x, y, s=12)
    top = max(x + y + [1])
    ax.plot([0, top], [0, top], lw=0.8, color="grey")
    ax.set_xlabel("QAOA qubits")
    ax.set_ylabel("QRAO qubits")
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return path


def aggregate(rows: Iterable[dict], keys: Sequence[str]) -> list[dict]:
    """Per-group counts: rows, skipped, attempted, feasible, optimal, mean gap.

    Feasible and optimal rates use attempted (non-skipped) rows as the
    denominator; the mean gap averages feasible rows only.
    """
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in keys), []).append(r)
    out = []
    for key in sorted(groups, key=lambda t: tuple(str(v) for v in t)):
        rs = groups[key]
        attempted = [r for r in rs if r["status"] != SKIPPED]
        feasible = [r for r in attempted if r["feasible"]]
        gaps = [r["gap"] for r in feasible if r["gap"] is not None]
        optimal = [g for g in gaps if g < OPTIMAL_GAP]
        n = len(attempted)
        out.append(
            {
                **dict(zip(keys, key)),
                "rows": len(rs),
                "skipped": len(rs) - n,
                "attempted": n,
                "feasible": len(feasible),
                "optimal": len(optimal),
                "feasible_pct": 100.0 * len(feasible) / n if n else None,
                "optimal_pct": 100.0 * len(optimal) / n if n else None,
                "mean_gap": float(np.mean(gaps)) if gaps else None,
            }
        )
    return out


# ---------------------------------------------------------------------------
# row helpers


def _q(v) -> str | None:
    return None if v is None else str(Fraction(v))


def _assignment_list(assignment: dict[int, int] | None) -> list[int] | None:
    return None if assignment is None else [int(assignment[k]) for k in sorted(assignment)]


def _result_fields(outcome_feasible: bool, objective, assignment, optimum, sense) -> dict:
    gap = None
    if outcome_feasible and optimum is not None:
        gap = optimality_gap(objective, optimum, sense)
    return {
        "feasible": bool(outcome_feasible),
        "objective": _q(objective),
        "optimum": _q(optimum),
        "gap": gap,
        "assignment": _assignment_list(assignment),
    }


def _guard(row: dict, action: Callable[[], dict]) -> dict:
    """Run one cell; unexpected exceptions become an ``error`` row."""
    start = time.monotonic()
    try:
        row.update(action())
    except Exception as exc:  # a failed cell must not sink the whole run
        log.exception("row %s failed", row)
        row.update(status=ERROR, reason=f"{type(exc).__name__}: {exc}", feasible=False, gap=None)
    row["wall_time_s"] = round(time.monotonic() - start, 3)
    return row


def _oracle_optimum(ip: IntegerProgram, budget: int):
    res = solve_exact(ip, budget)
    return res.optimum if res.status == OPTIMAL else None


def _log_progress(config: ExperimentConfig, k: int) -> None:
    log.info("%s: instance %d/%d", config.experiment, k + 1, config.instances)


# ---------------------------------------------------------------------------
# experiments


def run_ansatz_study(config: ExperimentConfig) -> ExperimentReport:
    """QRAO on 3-bin MKPs over ansatz families, entanglements and depths."""
    rows = []
    grid = []
    for fam in config.families:
        ents = ("brick",) if fam == "brickwork" else config.entanglements
        grid += [(fam, ent, layers) for ent in ents for layers in config.layer_grid]
    for k in range(config.instances):
        _log_progress(config, k)
        seed = derive_seed(config.seed, k)
        ip = build_mkp(generate_mkp(seed, config.bins_range, config.items_range))
        optimum = _oracle_optimum(ip, config.oracle_budget)
        enc = encode_program(ip, "qrao")
        for c, (fam, ent, layers) in enumerate(grid):
            row = {"instance": k, "seed": seed, "family": fam, "entanglement": ent, "layers": layers,
                   "status": OK, "reason": "", "qubits": enc.qubit_count}
            run_seed = derive_seed(config.seed, k, 1, c)

            def cell(fam=fam, ent=ent, layers=layers, run_seed=run_seed):
                spec = AnsatzSpec(fam, layers, "full" if ent == "brick" else ent, seed=run_seed)
                out = run_qrao(ip, spec, config.optimizer(run_seed), config.rounding(run_seed),
                               cap=config.solve_cap, encoding=enc)
                return {"evals": out.evals, **_result_fields(out.feasible, out.objective, out.assignment, optimum, ip.sense)}

            rows.append(_guard(row, cell))
    notes = ["realamp cells are expected to score lowest: real amplitudes cannot reach the complex QRAC phases"]
    return ExperimentReport(config, rows, ("family", "entanglement", "layers"), annotations=notes)


def run_mkp_compare(config: ExperimentConfig) -> ExperimentReport:
    """QAOA against QRAO (each rounding scheme separately) on generated MKPs."""
    rows, fig2 = [], []
    for k in range(config.instances):
        _log_progress(config, k)
        seed = derive_seed(config.seed, k)
        inst = generate_mkp(seed, config.bins_range, config.items_range)
        ip = build_mkp(inst)
        encodings = {"qrao": encode_program(ip, "qrao"), "qaoa": encode_program(ip, "qaoa")}
        qa, qr = encodings["qaoa"].qubit_count, encodings["qrao"].qubit_count
        fig2.append({"instance": k, "seed": seed, "bins": len(inst.capacities), "items": len(inst.profits),
                     "variables": ip.n, "qaoa_qubits": qa, "qrao_qubits": qr, "ratio": qr / qa})
        optimum = None
        if any(encodings[m].qubit_count <= config.solve_cap for m in config.methods):
            optimum = _oracle_optimum(ip, config.oracle_budget)
        base = {"instance": k, "seed": seed, "bins": len(inst.capacities), "items": len(inst.profits)}
        run_seed = derive_seed(config.seed, k, 1)
        for method in config.methods:
            enc = encodings[method]
            labels = ["qaoa"] if method == "qaoa" else [f"qrao+{s}" for s in config.schemes]
            common = {"qubits": enc.qubit_count, "qubo_vars": enc.qubo.n}
            if enc.qubit_count > config.solve_cap:
                reason = f"{enc.qubit_count} qubits exceed solve cap {config.solve_cap}"
                for label in labels:
                    rows.append({**base, "method": label, "status": SKIPPED, "reason": reason, **common,
                                 "feasible": False, "gap": None, "wall_time_s": 0.0})
                continue
            if method == "qaoa":
                row = {**base, "method": "qaoa", "status": OK, "reason": "", **common}

                def qaoa_cell(enc=enc):
                    out = run_qaoa(ip, config.qaoa_layers, config.qaoa_optimizer(run_seed), config.qaoa_shots,
                                   run_seed, cap=config.solve_cap, encoding=enc)
                    return {"evals": out.evals,
                            **_result_fields(out.feasible, out.objective, out.assignment, optimum, ip.sense)}

                rows.append(_guard(row, qaoa_cell))
                continue
            # one QRAO run feeds one row per rounding scheme
            row = {**base, "method": "qrao", "status": OK, "reason": "", **common}
            holder: dict[str, SolveOutcome] = {}

            def qrao_cell(enc=enc):
                holder["out"] = run_qrao(ip, AnsatzSpec(config.ansatz, config.layers, seed=run_seed),
                                         config.optimizer(run_seed), config.rounding(run_seed),
                                         cap=config.solve_cap, encoding=enc)
                return {}

            _guard(row, qrao_cell)
            for label in labels:
                scheme_row = {**row, "method": label}
                if "out" in holder:
                    scheme_row.update(_scheme_fields(holder["out"], label.split("+")[1], optimum, ip.sense))
                rows.append(scheme_row)
    return ExperimentReport(config, rows, ("method",), fig2=fig2)


def _scheme_fields(out: SolveOutcome, scheme: str, optimum, sense) -> dict:
    res = out.schemes[scheme]
    return {"evals": out.evals, **_result_fields(res.feasible, res.objective, res.assignment, optimum, sense)}


def run_lr_procurement(config: ExperimentConfig) -> ExperimentReport:
    """LP presolve, residual QRAO, lift and exact evaluation on procurement."""
    rows = []
    policies = [FixingPolicy.parse(p) for p in config.policies]
    for k in range(config.instances):
        _log_progress(config, k)
        seed = derive_seed(config.seed, k)
        inst = generate_procurement(seed, config.suppliers, config.parts, config.d_range,
                                    max_binary=config.max_binary)
        ip = build_procurement(inst)
        binary, bz = binarize(ip)
        lp = solve_lp(binary)
        optimum = _oracle_optimum(ip, config.oracle_budget)
        for p, policy in enumerate(policies):
            run_seed = derive_seed(config.seed, k, 1, p)
            row = {"instance": k, "seed": seed, "policy": policy.label(), "n_binary": binary.n,
                   "status": OK, "reason": ""}

            def cell(policy=policy, run_seed=run_seed):
                red = fix_variables(binary, lp, policy, seed=run_seed)
                fields = {"n_fixed": len(red.fixed), "residual_vars": red.residual.n}
                if red.status == FIXING_INFEASIBLE:
                    return {**fields, "status": FIXING_INFEASIBLE, "reason": ", ".join(red.conflicts),
                            "feasible": False, "gap": None}
                try:
                    enc = encode_program(red.residual, "qrao")
                except EncodingError as exc:
                    return {**fields, "status": RESIDUAL_INFEASIBLE, "reason": str(exc), "feasible": False, "gap": None}
                fields.update(qubits=enc.qubit_count, qubo_vars=enc.qubo.n)
                if enc.qubit_count > config.solve_cap:
                    return {**fields, "status": SKIPPED,
                            "reason": f"{enc.qubit_count} qubits exceed solve cap {config.solve_cap}",
                            "feasible": False, "gap": None}
                out = run_qrao(red.residual, AnsatzSpec(config.ansatz, config.layers, seed=run_seed),
                               config.optimizer(run_seed), config.rounding(run_seed), original=ip,
                               lift=lambda a: bz.decode(lift_solution(red, a)), cap=config.solve_cap,
                               encoding=enc)
                feasible = out.feasible and evaluate(ip, out.assignment).feasible
                return {**fields, "evals": out.evals,
                        **_result_fields(feasible, out.objective, out.assignment, optimum, ip.sense)}

            rows.append(_guard(row, cell))
    return ExperimentReport(config, rows, ("policy",))


RUNNERS = {
    "ansatz_study": run_ansatz_study,
    "mkp_compare": run_mkp_compare,
    "lr_procurement": run_lr_procurement,
}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    return RUNNERS[config.experiment](config)
