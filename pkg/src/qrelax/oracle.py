"""Exact reference solvers: vectorized enumeration and LP-based branch and bound."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import MAXIMIZE, IntegerProgram, evaluate
from .presolve import OPTIMAL as LP_OPTIMAL
from .presolve import solve_lp

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNSOLVED = "unsolved"

BRUTE_LIMIT = 28
CHUNK = 1 << 16
RESTART_EVERY = 10_000


@dataclass(frozen=True)
class OracleResult:
    status: str
    optimum: Fraction | None
    argmax: dict[int, int] | None
    nodes_explored: int
    method: str


def _lcm_denominator(values) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    return d


def _box_size(ip: IntegerProgram) -> int:
    return math.prod(v.upper - v.lower + 1 for v in ip.variables)


def solve_brute(ip: IntegerProgram) -> OracleResult:
    """Enumerate every point of the variable box (lowest index wins ties).

    Index k maps to x by mixed radix, variable 0 least significant.
    """
    if _box_size(ip) > 1 << BRUTE_LIMIT:
        raise ValueError(f"box of {ip.n} variables too large for enumeration")
    lows = np.array([v.lower for v in ip.variables], dtype=np.int64)
    radix = np.array([v.upper - v.lower + 1 for v in ip.variables], dtype=np.int64)
    place = np.cumprod(np.concatenate([[1], radix[:-1]])) if ip.n else np.zeros(0, np.int64)

    # integer-scaled rows for exact arithmetic
    rows = []
    for con in ip.constraints:
        scale = _lcm_denominator([*con.coefficients.values(), con.rhs])
        a = np.zeros(ip.n, dtype=np.int64)
        for k, c in con.coefficients.items():
            a[k] = int(c * scale)
        rows.append((a, con.relation, int(con.rhs * scale)))
    oscale = _lcm_denominator(ip.objective.values())
    c = np.zeros(ip.n, dtype=np.int64)
    for k, v in ip.objective.items():
        c[k] = int(v * oscale)
    if ip.sense != MAXIMIZE:
        c = -c

    total = _box_size(ip)
    best_val, best_idx = None, None
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        X = lows + (idx[:, None] // place) % radix if ip.n else np.zeros((idx.size, 0), np.int64)
        ok = np.ones(idx.size, dtype=bool)
        for a, rel, rhs in rows:
            lhs = X @ a
            if rel == "<=":
                ok &= lhs <= rhs
            elif rel == ">=":
                ok &= lhs >= rhs
            else:
                ok &= lhs == rhs
        if not ok.any():
            continue
        vals = X @ c
        vals = np.where(ok, vals, np.iinfo(np.int64).min)
        j = int(np.argmax(vals))
        if best_val is None or vals[j] > best_val:
            best_val, best_idx = int(vals[j]), int(idx[j])
    if best_idx is None:
        return OracleResult(INFEASIBLE, None, None, total, "brute")
    x = lows + (best_idx // place) % radix if ip.n else []
    argmax = {k: int(x[k]) for k in range(ip.n)}
    return OracleResult(OPTIMAL, ip.objective_value(argmax), argmax, total, "brute")


def _integral(values: dict[int, float], tol: float = 1e-9) -> bool:
    return all(abs(v - round(v)) <= tol for v in values.values())


def solve_bnb(ip: IntegerProgram, budget: int = 200_000) -> OracleResult:
    """Depth-first branch and bound on LP bounds.

    Branches on the most fractional variable (ties by id); every
    ``RESTART_EVERY`` nodes the open list is reordered best-bound first.
    """
    sign = 1.0 if ip.sense == MAXIMIZE else -1.0
    integral_obj = all(Fraction(v).denominator == 1 for v in ip.objective.values())
    root = {v.id: (float(v.lower), float(v.upper)) for v in ip.variables}

    incumbent: dict[int, int] | None = None
    inc_val: Fraction | None = None
    nodes = 0
    counter = 0
    stack = [(math.inf, counter, root)]

    def prunable(bound: float) -> bool:
        if inc_val is None:
            return False
        limit = sign * float(inc_val)
        if integral_obj:
            return math.floor(bound + 1e-7) <= limit
        return bound <= limit + 1e-9

    while stack:
        if nodes >= budget:
            return OracleResult(UNSOLVED, inc_val, incumbent, nodes, "bnb")
        if nodes and nodes % RESTART_EVERY == 0:
            stack.sort(key=lambda node: (node[0], -node[1]))
        parent_bound, _, bounds = stack.pop()
        if prunable(parent_bound):
            continue
        nodes += 1
        lp = solve_lp(ip, bounds)
        if lp.status != LP_OPTIMAL:
            continue
        bound = sign * lp.objective
        if prunable(bound):
            continue
        if _integral(lp.values):
            cand = {k: int(round(v)) for k, v in lp.values.items()}
            ev = evaluate(ip, cand)
            if ev.feasible and (inc_val is None or sign * ev.objective > sign * inc_val):
                incumbent, inc_val = cand, ev.objective
                continue
        frac = {k: abs(v - round(v)) for k, v in lp.values.items() if bounds[k][0] < bounds[k][1]}
        if not frac or max(frac.values()) <= 1e-9:
            # integral but rounding broke exact feasibility: split the widest box
            k = min((k for k in bounds if bounds[k][0] < bounds[k][1]), default=None)
            if k is None:
                continue
            split = math.floor((bounds[k][0] + bounds[k][1]) / 2)
        else:
            k = max(sorted(frac), key=lambda key: frac[key])
            split = math.floor(lp.values[k])
        down = dict(bounds)
        down[k] = (bounds[k][0], float(split))
        up = dict(bounds)
        up[k] = (float(split + 1), bounds[k][1])
        # explore the side nearer the LP value first
        children = [down, up] if lp.values[k] - split >= 0.5 else [up, down]
        for child in children:
            counter += 1
            stack.append((bound, counter, child))
    if incumbent is None:
        return OracleResult(INFEASIBLE, None, None, nodes, "bnb")
    return OracleResult(OPTIMAL, inc_val, incumbent, nodes, "bnb")


def solve_exact(ip: IntegerProgram, budget: int = 200_000, method: str = "auto") -> OracleResult:
    if method == "auto":
        method = "brute" if _box_size(ip) <= 1 << 20 else "bnb"
    if method == "brute":
        return solve_brute(ip)
    if method == "bnb":
        return solve_bnb(ip, budget)
    raise ValueError(f"unknown oracle method {method!r}")


def optimality_gap(found, opt, sense: str = MAXIMIZE) -> float:
    """Relative gap ``|opt - found| / |opt|``; for ``opt == 0`` the gap is 0
    on an exact match and 1 otherwise."""
    found, opt = Fraction(found), Fraction(opt)
    if opt == 0:
        return 0.0 if found == 0 else 1.0
    return float(abs(opt - found) / abs(opt))
