"""qrelax command line: generate instances, presolve, solve, exact reference, benchmarks."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .encode import binarize
from .harness import ALIASES, ExperimentConfig, run_experiment
from .model import build_mkp, build_procurement, generate_mkp, generate_procurement
from .oracle import solve_exact
from .presolve import FixingPolicy, fix_variables, solve_lp
from .rounding import RoundingConfig
from .sim import FAMILIES, AnsatzSpec
from .variational import OptimizerConfig, SolveOutcome, run_qaoa, run_qrao

log = logging.getLogger("qrelax")


def _pair(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(",")
    return int(lo), int(hi or lo)


def cmd_generate(args) -> int:
    if args.problem == "mkp":
        inst = generate_mkp(args.seed, args.bins, args.items)
        ip = build_mkp(inst)
        meta = {"profits": inst.profits, "weights": inst.weights, "capacities": inst.capacities}
    else:
        inst = generate_procurement(args.seed, args.suppliers, args.parts, args.demand, max_binary=args.max_binary)
        ip = build_procurement(inst)
        meta = {"risk": [str(r) for r in inst.risk], "demand": inst.demand,
                "tolerance": [str(t) for t in inst.tolerance]}
    data = io.program_to_dict(ip)
    data["meta"] = {"problem": args.problem, "seed": args.seed, **meta}
    io.write_json(args.out, data)
    return 0


def cmd_presolve(args) -> int:
    ip = io.load_program(args.input)
    binary, bz = binarize(ip)
    lp = solve_lp(binary)
    if lp.status != "optimal":
        log.error("LP relaxation is %s", lp.status)
        return 1
    red = fix_variables(binary, lp, FixingPolicy.parse(args.policy), seed=args.seed)
    data = io.reduction_to_dict(red, bz)
    data["lp_objective"] = lp.objective
    io.write_json(args.out, data)
    log.info("fixed %d of %d binaries (%s)", len(red.fixed), binary.n, red.status)
    return 0 if red.status == "ok" else 2


def _outcome_dict(out: SolveOutcome) -> dict:
    def scheme(s):
        return {"feasible": s.feasible, "objective": s.objective, "candidates": s.n_candidates,
                "feasible_candidates": s.n_feasible,
                "assignment": None if s.assignment is None else [s.assignment[k] for k in sorted(s.assignment)]}

    return {
        "method": out.method,
        "feasible": out.feasible,
        "objective": out.objective,
        "assignment": None if out.assignment is None else [out.assignment[k] for k in sorted(out.assignment)],
        "qubits": out.qubits,
        "qubo_variables": out.n_variables,
        "relaxed_value": out.relaxed_value,
        "evals": out.evals,
        "schemes": {k: scheme(v) for k, v in sorted(out.schemes.items())},
        "diagnostics": out.diagnostics,
    }


def cmd_solve(args) -> int:
    ip = io.load_program(args.input)
    opt = OptimizerConfig(max_evals=args.max_evals, seed=args.seed, restarts=args.restarts)
    if args.method == "qrao":
        spec = AnsatzSpec(args.ansatz, args.layers, args.entanglement, seed=args.seed)
        rounding = (RoundingConfig("pauli", 1, args.seed), RoundingConfig("magic", args.shots, args.seed))
        out = run_qrao(ip, spec, opt, rounding, cap=args.cap)
        settings = {"ansatz": spec.label(), "shots": args.shots}
    else:
        out = run_qaoa(ip, args.layers, opt, args.shots, args.seed, cap=args.cap)
        settings = {"layers": args.layers, "shots": args.shots}
    report = {"instance": str(args.input), **_outcome_dict(out),
              "settings": {"seed": args.seed, "max_evals": args.max_evals, "restarts": args.restarts, **settings}}
    if args.report:
        io.write_json(args.report, report)
    else:
        sys.stdout.write(io.dumps(report))
    return 0


def cmd_exact(args) -> int:
    ip = io.load_program(args.input)
    res = solve_exact(ip, args.budget, args.method)
    out = {"status": res.status, "optimum": res.optimum, "method": res.method, "nodes": res.nodes_explored,
           "assignment": None if res.argmax is None else [res.argmax[k] for k in sorted(res.argmax)]}
    sys.stdout.write(io.dumps(out))
    return 0 if res.status != "unsolved" else 1


def cmd_bench(args) -> int:
    overrides = {k: v for k, v in {
        "instances": args.instances, "max_evals": args.max_evals, "restarts": args.restarts,
        "layers": args.layers, "shots": args.shots, "solve_cap": args.cap,
    }.items() if v is not None}
    if args.policies:
        overrides["policies"] = tuple(args.policies.split(","))
    if args.methods:
        overrides["methods"] = tuple(args.methods.split(","))
    config = ExperimentConfig.for_experiment(args.experiment, seed=args.seed, plot=not args.no_plot, **overrides)
    report = run_experiment(config)
    for path in report.write(args.out):
        log.info("wrote %s", path)
    for agg in report.aggregates:
        log.info("%s", agg)
    return 0 if report.completed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qrelax", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded instance as JSON")
    g.add_argument("--problem", choices=("mkp", "procurement"), required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--bins", type=_pair, default=(2, 5), help="inclusive range, e.g. 2,5")
    g.add_argument("--items", type=_pair, default=(2, 10))
    g.add_argument("--suppliers", type=int, default=5)
    g.add_argument("--parts", type=int, default=10)
    g.add_argument("--demand", type=_pair, default=(3, 7))
    g.add_argument("--max-binary", type=int, default=None)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("presolve", help="LP relaxation and variable fixing")
    r.add_argument("--in", dest="input", type=Path, required=True)
    r.add_argument("--policy", default="delta:0.1", help="delta:D, percent:P or percent:P:random")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", type=Path, required=True)
    r.set_defaults(func=cmd_presolve)

    s = sub.add_parser("solve", help="QRAO or QAOA on one instance")
    s.add_argument("--method", choices=("qrao", "qaoa"), default="qrao")
    s.add_argument("--in", dest="input", type=Path, required=True)
    s.add_argument("--ansatz", choices=[f for f in FAMILIES if f != "qaoa"], default="brickwork")
    s.add_argument("--entanglement", default="full")
    s.add_argument("--layers", type=int, default=None, help="default 8 (qrao) or 5 (qaoa)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-evals", type=int, default=1000)
    s.add_argument("--restarts", type=int, default=3)
    s.add_argument("--shots", type=int, default=None, help="default 1024 (qrao magic) or 4096 (qaoa)")
    s.add_argument("--cap", type=int, default=24)
    s.add_argument("--report", type=Path, default=None)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("exact", help="exact optimum by enumeration or branch and bound")
    e.add_argument("--in", dest="input", type=Path, required=True)
    e.add_argument("--budget", type=int, default=200_000)
    e.add_argument("--method", choices=("auto", "brute", "bnb"), default="auto")
    e.set_defaults(func=cmd_exact)

    b = sub.add_parser("bench", help="run a seeded experiment")
    b.add_argument("--experiment", choices=sorted(ALIASES), required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", type=Path, required=True)
    b.add_argument("--instances", type=int, default=None)
    b.add_argument("--max-evals", type=int, default=None)
    b.add_argument("--restarts", type=int, default=None)
    b.add_argument("--layers", type=int, default=None)
    b.add_argument("--shots", type=int, default=None)
    b.add_argument("--cap", type=int, default=None, help="largest qubit count that is simulated")
    b.add_argument("--policies", default=None, help="comma separated, lr only")
    b.add_argument("--methods", default=None, help="comma separated subset of qaoa,qrao")
    b.add_argument("--no-plot", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "solve":
        if args.layers is None:
            args.layers = 8 if args.method == "qrao" else 5
        if args.shots is None:
            args.shots = 1024 if args.method == "qrao" else 4096
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
