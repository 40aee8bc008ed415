"""LP relaxation presolve: dense two-phase simplex, variable fixing, lifting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .model import (
    MAXIMIZE,
    IntegerProgram,
    LinearConstraint,
    ModelError,
    Variable,
)

LP_TOL = 1e-9
PIVOT_TOL = 1e-11
MAX_PIVOTS = 10**6

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LpError(RuntimeError):
    pass


@dataclass(frozen=True)
class LpSolution:
    values: dict[int, float]
    objective: float
    status: str
    pivots: int = 0


class _Tableau:
    """Simplex tableau for ``min c.x  s.t.  A x = b, x >= 0`` with ``b >= 0``.

    Bland's rule throughout: entering column is the lowest index with a
    negative reduced cost; ratio-test ties go to the lowest basic index.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: list[int]):
        m, N = A.shape
        self.T = np.zeros((m + 1, N + 1))
        self.T[:m, :N] = A
        self.T[:m, N] = b
        self.basis = list(basis)
        self.pivots = 0

    @property
    def m(self) -> int:
        return self.T.shape[0] - 1

    def set_cost(self, c: np.ndarray) -> None:
        T = self.T
        T[-1, :] = 0.0
        T[-1, : len(c)] = c
        for i, j in enumerate(self.basis):
            if T[-1, j] != 0.0:
                T[-1, :] -= T[-1, j] * T[i, :]

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row, :] /= T[row, col]
        col_vals = T[:, col].copy()
        col_vals[row] = 0.0
        T -= np.outer(col_vals, T[row, :])
        T[:, col] = 0.0
        T[row, col] = 1.0
        self.basis[row] = col
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise LpError("cycling suspected")

    def run(self, allowed: int) -> str:
        T = self.T
        while True:
            reduced = T[-1, :allowed]
            candidates = np.nonzero(reduced < -LP_TOL)[0]
            if candidates.size == 0:
                return OPTIMAL
            col = int(candidates[0])
            column = T[:-1, col]
            rows = np.nonzero(column > PIVOT_TOL)[0]
            if rows.size == 0:
                return UNBOUNDED
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + LP_TOL * max(1.0, abs(best))]
            row = int(min(ties, key=lambda r: self.basis[r]))
            self.pivot(row, col)

    def drop_row(self, row: int) -> None:
        self.T = np.delete(self.T, row, axis=0)
        del self.basis[row]


def solve_lp(ip: IntegerProgram, bounds: Mapping[int, tuple[float, float]] | None = None) -> LpSolution:
    """Solve the LP relaxation of ``ip``.

    ``bounds`` overrides variable bounds (used by branch and bound).
    """
    n = ip.n
    lo = np.array([v.lower for v in ip.variables], dtype=float)
    hi = np.array([v.upper for v in ip.variables], dtype=float)
    if bounds:
        for k, (a, b) in bounds.items():
            lo[k], hi[k] = a, b
    if not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
        raise LpError("LP relaxation needs finite variable bounds")
    if np.any(lo > hi + LP_TOL):
        return LpSolution({}, math.nan, INFEASIBLE)

    free = [k for k in range(n) if hi[k] - lo[k] > LP_TOL]
    col_of = {k: c for c, k in enumerate(free)}
    nf = len(free)

    rows: list[tuple[np.ndarray, str, float]] = []
    for con in ip.constraints:
        a = np.zeros(nf)
        rhs = float(con.rhs)
        for k, coef in con.coefficients.items():
            coef = float(coef)
            rhs -= coef * lo[k]
            if k in col_of:
                a[col_of[k]] = coef
        if not a.any():
            ok = {
                "<=": 0.0 <= rhs + LP_TOL,
                ">=": 0.0 >= rhs - LP_TOL,
                "=": abs(rhs) <= LP_TOL,
            }[con.relation]
            if not ok:
                return LpSolution({}, math.nan, INFEASIBLE)
            continue
        rows.append((a, con.relation, rhs))
    for c, k in enumerate(free):
        a = np.zeros(nf)
        a[c] = 1.0
        rows.append((a, "<=", hi[k] - lo[k]))

    # normalize to nonnegative right-hand sides
    norm = []
    for a, rel, rhs in rows:
        if rhs < 0:
            a, rhs = -a, -rhs
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        norm.append((a, rel, rhs))

    m = len(norm)
    n_slack = sum(1 for _, rel, _ in norm if rel != "=")
    n_art = sum(1 for _, rel, _ in norm if rel != "<=")
    N = nf + n_slack + n_art
    A = np.zeros((m, N))
    b = np.zeros(m)
    basis = []
    s_col, a_col = nf, nf + n_slack
    for i, (a, rel, rhs) in enumerate(norm):
        A[i, :nf] = a
        b[i] = rhs
        if rel == "<=":
            A[i, s_col] = 1.0
            basis.append(s_col)
            s_col += 1
        elif rel == ">=":
            A[i, s_col] = -1.0
            s_col += 1
            A[i, a_col] = 1.0
            basis.append(a_col)
            a_col += 1
        else:
            A[i, a_col] = 1.0
            basis.append(a_col)
            a_col += 1

    tab = _Tableau(A, b, basis)
    art_start = nf + n_slack
    if n_art:
        phase1 = np.zeros(N)
        phase1[art_start:] = 1.0
        tab.set_cost(phase1)
        tab.run(N)
        if -tab.T[-1, -1] > LP_TOL * max(1.0, float(b.sum())):
            return LpSolution({}, math.nan, INFEASIBLE, tab.pivots)
        # drive zero-level artificials out of the basis
        i = 0
        while i < tab.m:
            if tab.basis[i] >= art_start:
                cols = np.nonzero(np.abs(tab.T[i, :art_start]) > 1e-9)[0]
                if cols.size:
                    tab.pivot(i, int(cols[0]))
                else:
                    tab.drop_row(i)
                    continue
            i += 1
        tab.T = np.delete(tab.T, np.s_[art_start:N], axis=1)

    sign = -1.0 if ip.sense == MAXIMIZE else 1.0
    cost = np.zeros(art_start)
    for k, coef in ip.objective.items():
        if k in col_of:
            cost[col_of[k]] = sign * float(coef)
    tab.set_cost(cost)
    status = tab.run(art_start)
    if status == UNBOUNDED:
        return LpSolution({}, math.nan, UNBOUNDED, tab.pivots)

    x = lo.copy()
    for i, j in enumerate(tab.basis):
        if j < nf:
            x[free[j]] = lo[free[j]] + tab.T[i, -1]
    x = np.clip(x, lo, hi)
    values = {k: float(x[k]) for k in range(n)}
    objective = float(sum(float(c) * x[k] for k, c in ip.objective.items()))
    return LpSolution(values, objective, OPTIMAL, tab.pivots)


# ---------------------------------------------------------------------------
# fixing


@dataclass(frozen=True)
class FixingPolicy:
    """``delta``: fix values below delta to 0 and above 1 - delta to 1.
    ``percent``: fix a share of the binaries, picked by distance to the
    nearest integer (``pick="distance"``) or uniformly at random.
    """

    mode: str
    delta: float | None = None
    percent: float | None = None
    pick: str = "distance"

    def __post_init__(self):
        if self.mode == "delta":
            if self.delta is None or self.percent is not None or not 0 < self.delta < 0.5:
                raise ValueError("delta policy needs 0 < delta < 0.5 and no percent")
        elif self.mode == "percent":
            if self.percent is None or self.delta is not None or not 0 < self.percent <= 1:
                raise ValueError("percent policy needs 0 < percent <= 1 and no delta")
        else:
            raise ValueError(f"unknown fixing mode {self.mode!r}")
        if self.pick not in ("distance", "random"):
            raise ValueError(f"unknown pick rule {self.pick!r}")

    @classmethod
    def parse(cls, text: str) -> "FixingPolicy":
        """Parse ``delta:0.1``, ``percent:0.9`` or ``percent:0.9:random``."""
        parts = text.split(":")
        if parts[0] == "delta" and len(parts) == 2:
            return cls("delta", delta=float(parts[1]))
        if parts[0] == "percent" and len(parts) in (2, 3):
            return cls("percent", percent=float(parts[1]), pick=parts[2] if len(parts) == 3 else "distance")
        raise ValueError(f"cannot parse fixing policy {text!r}")

    def label(self) -> str:
        if self.mode == "delta":
            return f"delta:{self.delta:g}"
        suffix = "" if self.pick == "distance" else ":random"
        return f"percent:{self.percent:g}{suffix}"


FIXED = "ok"
FIXING_INFEASIBLE = "fixing-infeasible"


@dataclass(frozen=True)
class Reduction:
    fixed: dict[int, int]
    residual: IntegerProgram
    lift: dict[int, int]  # residual id -> original id
    offset: Fraction
    status: str = FIXED
    n_original: int = 0
    policy: str = ""
    conflicts: tuple[str, ...] = field(default=())


def _snap(value: float) -> float:
    r = round(value)
    return float(r) if abs(value - r) <= LP_TOL else value


def _choose_fixings(ip: IntegerProgram, lp: LpSolution, policy: FixingPolicy, seed) -> dict[int, int]:
    binaries = [v.id for v in ip.variables if v.is_binary]
    vals = {k: _snap(lp.values[k]) for k in binaries}
    if policy.mode == "delta":
        fixed = {}
        for k in binaries:
            if vals[k] < policy.delta:
                fixed[k] = 0
            elif vals[k] > 1 - policy.delta:
                fixed[k] = 1
        return fixed
    count = math.ceil(Fraction(str(policy.percent)) * len(binaries))
    if policy.pick == "random":
        rng = np.random.default_rng(seed)
        chosen = sorted(int(k) for k in rng.permutation(binaries)[:count])
    else:
        chosen = sorted(binaries, key=lambda k: (min(vals[k], 1 - vals[k]), k))[:count]
    return {k: int(vals[k] > 0.5) for k in sorted(chosen)}


def restrict(ip: IntegerProgram, fixed: Mapping[int, int], policy_label: str = "") -> Reduction:
    """Substitute ``fixed`` values into ``ip`` and fold constants."""
    keep = [v for v in ip.variables if v.id not in fixed]
    lift = {r: v.id for r, v in enumerate(keep)}
    new_id = {orig: r for r, orig in lift.items()}
    variables = [Variable(r, v.name, v.lower, v.upper) for r, v in enumerate(keep)]
    offset = sum((c * fixed[k] for k, c in ip.objective.items() if k in fixed), Fraction(0))
    objective = {new_id[k]: c for k, c in ip.objective.items() if k not in fixed}
    constraints = []
    conflicts = []
    for k, con in enumerate(ip.constraints):
        const = sum((c * fixed[i] for i, c in con.coefficients.items() if i in fixed), Fraction(0))
        coeffs = {new_id[i]: c for i, c in con.coefficients.items() if i not in fixed}
        rhs = con.rhs - const
        if not coeffs:
            probe = LinearConstraint({0: 1}, con.relation, rhs)
            if not probe.satisfied_by(Fraction(0)):
                conflicts.append(con.name or f"c{k}")
            continue
        constraints.append(LinearConstraint(coeffs, con.relation, rhs, con.name))
    residual = IntegerProgram(ip.sense, objective, constraints, variables, name=ip.name + "-residual")
    return Reduction(
        fixed=dict(sorted(fixed.items())),
        residual=residual,
        lift=lift,
        offset=offset,
        status=FIXING_INFEASIBLE if conflicts else FIXED,
        n_original=ip.n,
        policy=policy_label,
        conflicts=tuple(conflicts),
    )


def fix_variables(ip: IntegerProgram, lp: LpSolution, policy: FixingPolicy, seed=0) -> Reduction:
    if lp.status != OPTIMAL:
        raise LpError(f"cannot fix variables from a {lp.status} LP")
    return restrict(ip, _choose_fixings(ip, lp, policy, seed), policy.label())


def lift_solution(red: Reduction, residual_assignment: Mapping[int, int]) -> dict[int, int]:
    full = dict(red.fixed)
    for r, orig in red.lift.items():
        if r not in residual_assignment:
            raise ModelError(f"residual assignment missing variable {r}")
        if orig in full:
            raise AssertionError(f"residual variable {r} collides with fixed variable {orig}")
        full[orig] = int(residual_assignment[r])
    return dict(sorted(full.items()))
