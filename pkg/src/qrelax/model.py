"""Integer programs and the two problem families: multiple knapsack and
risk-aware procurement.

All model coefficients are exact rationals (``fractions.Fraction``) and
feasibility is decided without tolerances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from statistics import median
from typing import Mapping, Sequence

import numpy as np

MAXIMIZE = "maximize"
MINIMIZE = "minimize"
RELATIONS = ("<=", ">=", "=")

# cost of procuring a part from a supplier that does not make it
UNAVAILABLE_COST = Fraction(10**6)


class ModelError(ValueError):
    pass


class GenerationError(RuntimeError):
    pass


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**9)
    return Fraction(value)


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    lower: int = 0
    upper: int = 1

    def __post_init__(self):
        if self.lower > self.upper:
            raise ModelError(f"variable {self.name}: lower {self.lower} > upper {self.upper}")

    @property
    def is_binary(self) -> bool:
        return self.lower == 0 and self.upper == 1


@dataclass(frozen=True)
class LinearConstraint:
    coefficients: Mapping[int, Fraction]
    relation: str
    rhs: Fraction
    name: str = ""

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ModelError(f"unknown relation {self.relation!r}")
        coeffs = {int(k): as_fraction(v) for k, v in self.coefficients.items()}
        coeffs = {k: v for k, v in sorted(coeffs.items()) if v != 0}
        if not coeffs:
            raise ModelError(f"constraint {self.name!r} has no nonzero coefficients")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "rhs", as_fraction(self.rhs))

    def lhs(self, assignment: Mapping[int, int]) -> Fraction:
        return sum((c * assignment[i] for i, c in self.coefficients.items()), Fraction(0))

    def satisfied_by(self, lhs: Fraction) -> bool:
        if self.relation == "<=":
            return lhs <= self.rhs
        if self.relation == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class IntegerProgram:
    sense: str
    objective: Mapping[int, Fraction]
    constraints: tuple[LinearConstraint, ...]
    variables: tuple[Variable, ...]
    name: str = ""

    def __post_init__(self):
        if self.sense not in (MAXIMIZE, MINIMIZE):
            raise ModelError(f"unknown sense {self.sense!r}")
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for k, var in enumerate(self.variables):
            if var.id != k:
                raise ModelError(f"variable ids must be 0..n-1 without gaps; got {var.id} at {k}")
        obj = {int(k): as_fraction(v) for k, v in self.objective.items()}
        obj = {k: v for k, v in sorted(obj.items()) if v != 0}
        object.__setattr__(self, "objective", obj)
        n = len(self.variables)
        for k in obj:
            if not 0 <= k < n:
                raise ModelError(f"objective references unknown variable {k}")
        for con in self.constraints:
            for k in con.coefficients:
                if not 0 <= k < n:
                    raise ModelError(f"constraint {con.name!r} references unknown variable {k}")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def is_binary(self) -> bool:
        return all(v.is_binary for v in self.variables)

    def objective_value(self, assignment: Mapping[int, int]) -> Fraction:
        return sum((c * assignment[i] for i, c in self.objective.items()), Fraction(0))


@dataclass(frozen=True)
class Evaluation:
    objective: Fraction
    feasible: bool
    violations: tuple[tuple[str, Fraction, str, Fraction], ...] = ()

    @property
    def violation_total(self) -> Fraction:
        return sum((abs(lhs - rhs) for _, lhs, _, rhs in self.violations), Fraction(0))


def evaluate(ip: IntegerProgram, assignment: Mapping[int, int]) -> Evaluation:
    """Exact objective and feasibility of a full assignment.

    Raises ``ModelError`` naming the first missing or out-of-bound variable.
    """
    for var in ip.variables:
        if var.id not in assignment:
            raise ModelError(f"assignment is missing variable {var.name} (id {var.id})")
        value = assignment[var.id]
        if int(value) != value or not var.lower <= value <= var.upper:
            raise ModelError(
                f"variable {var.name} (id {var.id}) = {value} outside [{var.lower}, {var.upper}]"
            )
    violations = []
    for k, con in enumerate(ip.constraints):
        lhs = con.lhs(assignment)
        if not con.satisfied_by(lhs):
            violations.append((con.name or f"c{k}", lhs, con.relation, con.rhs))
    return Evaluation(ip.objective_value(assignment), not violations, tuple(violations))


# ---------------------------------------------------------------------------
# multiple knapsack


@dataclass(frozen=True)
class MkpInstance:
    profits: tuple[int, ...]
    weights: tuple[int, ...]
    capacities: tuple[int, ...]
    resamples: int = 0

    @property
    def bins(self) -> int:
        return len(self.capacities)

    @property
    def items(self) -> int:
        return len(self.profits)

    def triviality_failures(self) -> list[str]:
        """Names of the non-triviality inequalities this instance violates."""
        w, c = self.weights, self.capacities
        failed = []
        if not max(w) <= max(c):
            failed.append("max weight <= max capacity")
        if not min(c) >= min(w):
            failed.append("min capacity >= min weight")
        if not sum(w) >= max(c):
            failed.append("total weight >= max capacity")
        return failed


def mkp_var(instance: MkpInstance, i: int, j: int) -> int:
    """Variable id of x[i, j] (item j placed in bin i)."""
    return i * instance.items + j


def build_mkp(instance: MkpInstance) -> IntegerProgram:
    m, n = instance.bins, instance.items
    if len(instance.weights) != n:
        raise ModelError("profits and weights differ in length")
    if any(v <= 0 for v in (*instance.profits, *instance.weights, *instance.capacities)):
        raise ModelError("profits, weights and capacities must be positive integers")
    failed = instance.triviality_failures()
    if failed:
        raise ModelError("trivial MKP instance, violates: " + "; ".join(failed))
    variables = [
        Variable(mkp_var(instance, i, j), f"x[{i},{j}]") for i in range(m) for j in range(n)
    ]
    objective = {mkp_var(instance, i, j): instance.profits[j] for i in range(m) for j in range(n)}
    constraints = [
        LinearConstraint(
            {mkp_var(instance, i, j): instance.weights[j] for j in range(n)},
            "<=",
            instance.capacities[i],
            f"capacity[{i}]",
        )
        for i in range(m)
    ]
    constraints += [
        LinearConstraint({mkp_var(instance, i, j): 1 for i in range(m)}, "<=", 1, f"assign[{j}]")
        for j in range(n)
    ]
    return IntegerProgram(MAXIMIZE, objective, constraints, variables, name="mkp")


def generate_mkp(
    seed,
    bins_range=(2, 5),
    items_range=(2, 10),
    w_range=(1, 3),
    p_range=(1, 10),
    c_range=(1, 3),
    budget: int = 10_000,
) -> MkpInstance:
    """Sample a non-trivial MKP instance; all ranges are inclusive."""
    rng = np.random.default_rng(seed)
    for attempt in range(budget):
        m = int(rng.integers(bins_range[0], bins_range[1] + 1))
        n = int(rng.integers(items_range[0], items_range[1] + 1))
        inst = MkpInstance(
            profits=tuple(int(v) for v in rng.integers(p_range[0], p_range[1] + 1, n)),
            weights=tuple(int(v) for v in rng.integers(w_range[0], w_range[1] + 1, n)),
            capacities=tuple(int(v) for v in rng.integers(c_range[0], c_range[1] + 1, m)),
            resamples=attempt,
        )
        if not inst.triviality_failures():
            return inst
    raise GenerationError(f"no non-trivial MKP instance within {budget} samples")


# ---------------------------------------------------------------------------
# risk-aware procurement


@dataclass(frozen=True)
class ProcurementInstance:
    risk: tuple[Fraction, ...]  # per supplier, in [0, 9]
    cost: tuple[tuple[Fraction, ...], ...]  # cost[i][j]
    demand: tuple[int, ...]
    tolerance: tuple[Fraction, ...]  # per part, in [0, 9]
    resamples: int = 0

    @property
    def suppliers(self) -> int:
        return len(self.risk)

    @property
    def parts(self) -> int:
        return len(self.demand)

    def check(self) -> None:
        if len(self.cost) != self.suppliers or any(len(row) != self.parts for row in self.cost):
            raise ModelError("cost matrix must be suppliers x parts")
        if len(self.tolerance) != self.parts:
            raise ModelError("one tolerance per part required")
        for r in self.risk:
            if not 0 <= r <= 9:
                raise ModelError(f"risk score {r} outside [0, 9]")
        for j, psi in enumerate(self.tolerance):
            if not 0 <= psi <= 9:
                raise ModelError(f"tolerance {psi} of part {j} outside [0, 9]")
            if self.demand[j] <= 0:
                raise ModelError(f"demand of part {j} must be positive")
            if min(self.risk) > psi:
                raise ModelError(f"part {j}: no supplier within risk tolerance {psi}")
        if any(c <= 0 for row in self.cost for c in row):
            raise ModelError("costs must be positive")


def procurement_var(instance: ProcurementInstance, i: int, j: int) -> int:
    return i * instance.parts + j


def build_procurement(instance: ProcurementInstance) -> IntegerProgram:
    instance.check()
    S, P = instance.suppliers, instance.parts
    variables = [
        Variable(procurement_var(instance, i, j), f"y[{i},{j}]", 0, instance.demand[j])
        for i in range(S)
        for j in range(P)
    ]
    objective = {
        procurement_var(instance, i, j): as_fraction(instance.cost[i][j])
        for i in range(S)
        for j in range(P)
    }
    constraints = []
    for j in range(P):
        ids = [procurement_var(instance, i, j) for i in range(S)]
        constraints.append(
            LinearConstraint({k: 1 for k in ids}, ">=", instance.demand[j], f"demand[{j}]")
        )
        risk_row = {k: as_fraction(instance.risk[i]) for i, k in enumerate(ids)}
        if any(risk_row.values()):
            constraints.append(
                LinearConstraint(
                    risk_row,
                    "<=",
                    as_fraction(instance.tolerance[j]) * instance.demand[j],
                    f"risk[{j}]",
                )
            )
    return IntegerProgram(MINIMIZE, objective, constraints, variables, name="procurement")


def binarized_count(demand: Sequence[int], suppliers: int) -> int:
    return suppliers * sum(math.ceil(math.log2(d + 1)) for d in demand)


def generate_procurement(
    seed,
    suppliers: int = 5,
    parts: int = 10,
    d_range=(3, 7),
    cost_range=(1, 10),
    min_binary: int = 100,
    max_binary: int | None = None,
    budget: int = 10_000,
) -> ProcurementInstance:
    """Sample a feasible procurement instance.

    Risk scores are integers in [0, 9]; each tolerance is drawn on a 0.1 grid
    from [median(risk), 9], which keeps at least one supplier admissible per
    part. Instances are resampled until the binarized variable count lies in
    ``[min_binary, max_binary]``.
    """
    rng = np.random.default_rng(seed)
    for attempt in range(budget):
        demand = tuple(int(v) for v in rng.integers(d_range[0], d_range[1] + 1, parts))
        risk = tuple(Fraction(int(v)) for v in rng.integers(0, 10, suppliers))
        cost = tuple(
            tuple(Fraction(int(v)) for v in rng.integers(cost_range[0], cost_range[1] + 1, parts))
            for _ in range(suppliers)
        )
        lo = math.ceil(median(risk) * 10)
        tolerance = tuple(Fraction(int(v), 10) for v in rng.integers(lo, 91, parts))
        count = binarized_count(demand, suppliers)
        if count < min_binary or (max_binary is not None and count > max_binary):
            continue
        inst = ProcurementInstance(risk, cost, demand, tolerance, resamples=attempt)
        inst.check()
        return inst
    raise GenerationError(f"no procurement instance within {budget} samples")
