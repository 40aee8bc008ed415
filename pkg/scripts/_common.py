"""Shared argument handling for the experiment scripts."""
import argparse
import logging

from qrelax.harness import ExperimentConfig, ExperimentReport, run_experiment


def main(experiment: str, description: str, quick: dict, base: dict | None = None) -> int:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=f"results/{experiment}")
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--quick", action="store_true", help="tiny budgets, for a smoke run")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    overrides = dict(base or {})
    if args.quick:
        overrides.update(quick)
    if args.instances is not None:
        overrides["instances"] = args.instances
    config = ExperimentConfig.for_experiment(experiment, seed=args.seed, **overrides)
    report = run_experiment(config)
    report.write(args.out)
    print_table(report)
    print(f"\nwritten to {args.out}/")
    return 0 if report.completed else 1


def print_table(report: ExperimentReport) -> None:
    keys = list(report.group_by)
    head = keys + ["n", "skip", "feasible %", "optimal %", "mean gap"]
    print("  ".join(f"{h:>12}" for h in head))
    for agg in report.aggregates:
        cells = [str(agg[k]) for k in keys] + [
            str(agg["attempted"]),
            str(agg["skipped"]),
            _pct(agg["feasible_pct"]),
            _pct(agg["optimal_pct"]),
            "-" if agg["mean_gap"] is None else f"{agg['mean_gap']:.3f}",
        ]
        print("  ".join(f"{c:>12}" for c in cells))
    for note in report.annotations:
        print(f"note: {note}")


def _pct(v):
    return "-" if v is None else f"{v:.0f}"
