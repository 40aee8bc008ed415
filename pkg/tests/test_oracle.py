from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import enumerate_optimum, small_programs
from qrelax.model import (
    IntegerProgram,
    LinearConstraint,
    MkpInstance,
    Variable,
    build_mkp,
    build_procurement,
    evaluate,
    generate_mkp,
    generate_procurement,
)
from qrelax.oracle import INFEASIBLE, OPTIMAL, UNSOLVED, optimality_gap, solve_bnb, solve_brute, solve_exact


def knapsack_dp(profits, weights, capacity):
    """Textbook 0/1 knapsack table, an oracle independent of both solvers."""
    best = [0] * (capacity + 1)
    for p, w in zip(profits, weights):
        for c in range(capacity, w - 1, -1):
            best[c] = max(best[c], best[c - w] + p)
    return best[capacity]


@given(small_programs(max_vars=3, max_upper=3, max_rows=3))
def test_brute_and_bnb_agree_with_enumeration(ip):
    best, _ = enumerate_optimum(ip)
    for res in (solve_brute(ip), solve_bnb(ip)):
        if best is None:
            assert res.status == INFEASIBLE and res.optimum is None
        else:
            assert res.status == OPTIMAL and res.optimum == best
            ev = evaluate(ip, res.argmax)
            assert ev.feasible and ev.objective == best


@pytest.mark.parametrize("seed", range(15))
def test_bnb_matches_brute_on_generated_mkp(seed):
    ip = build_mkp(generate_mkp(seed, (2, 3), (3, 6)))
    assert solve_bnb(ip).optimum == solve_brute(ip).optimum


@pytest.mark.parametrize("seed", range(4))
def test_bnb_matches_brute_on_small_procurement(seed):
    ip = build_procurement(generate_procurement(seed, 2, 3, (1, 3), min_binary=1))
    assert solve_bnb(ip).optimum == solve_brute(ip).optimum


@given(
    st.lists(st.tuples(st.integers(1, 20), st.integers(1, 9)), min_size=1, max_size=10),
    st.integers(1, 30),
)
def test_single_bin_against_dynamic_program(items, capacity):
    profits = tuple(p for p, _ in items)
    weights = tuple(w for _, w in items)
    # built directly: the MKP builder rejects trivial instances on purpose
    vs = [Variable(k, f"x{k}") for k in range(len(items))]
    row = LinearConstraint(dict(enumerate(weights)), "<=", capacity)
    ip = IntegerProgram("maximize", dict(enumerate(profits)), [row], vs)
    expected = knapsack_dp(profits, weights, capacity)
    assert solve_exact(ip).optimum == expected
    assert solve_bnb(ip).optimum == expected


def test_unconstrained_program():
    vs = [Variable(0, "a", 0, 3), Variable(1, "b", -2, 2)]
    ip = IntegerProgram("maximize", {0: 2, 1: -1}, [], vs)
    for res in (solve_brute(ip), solve_bnb(ip)):
        assert res.optimum == 8 and res.argmax == {0: 3, 1: -2}


def test_empty_program():
    ip = IntegerProgram("maximize", {}, [], [])
    res = solve_brute(ip)
    assert res.status == OPTIMAL and res.optimum == 0 and res.argmax == {}


def test_fractional_coefficients():
    vs = [Variable(0, "a"), Variable(1, "b")]
    ip = IntegerProgram("maximize", {0: Fraction(1, 3), 1: Fraction(1, 2)},
                        [LinearConstraint({0: Fraction(1, 2), 1: Fraction(2, 3)}, "<=", Fraction(2, 3))], vs)
    assert solve_brute(ip).optimum == solve_bnb(ip).optimum == Fraction(1, 2)


@given(small_programs(max_vars=4, max_upper=2, max_rows=2), st.randoms(use_true_random=False))
def test_optimum_is_invariant_under_variable_reordering(ip, rnd):
    perm = list(range(ip.n))
    rnd.shuffle(perm)  # new id of old variable k is perm[k]
    variables = sorted((Variable(perm[v.id], v.name, v.lower, v.upper) for v in ip.variables), key=lambda v: v.id)
    rows = [LinearConstraint({perm[k]: c for k, c in con.coefficients.items()}, con.relation, con.rhs, con.name)
            for con in ip.constraints]
    moved = IntegerProgram(ip.sense, {perm[k]: c for k, c in ip.objective.items()}, rows, variables)
    assert solve_brute(moved).optimum == solve_brute(ip).optimum
    assert solve_bnb(moved).optimum == solve_brute(ip).optimum


def test_budget_exhaustion_is_unsolved():
    ip = build_mkp(generate_mkp(1, (4, 4), (9, 9)))
    res = solve_bnb(ip, budget=2)
    assert res.status == UNSOLVED and res.nodes_explored == 2


def test_brute_refuses_huge_boxes():
    ip = IntegerProgram("maximize", {0: 1}, [], [Variable(k, f"x{k}") for k in range(30)])
    with pytest.raises(ValueError):
        solve_brute(ip)
    assert solve_exact(ip).optimum == 1


def test_unknown_method():
    with pytest.raises(ValueError):
        solve_exact(build_mkp(MkpInstance((1, 2), (1, 1), (1,))), method="guess")


def test_gap_examples():
    assert optimality_gap(9, 10) == pytest.approx(0.1)
    assert optimality_gap(10, 10) == 0.0
    assert optimality_gap(11, 10, "minimize") == pytest.approx(0.1)
    assert optimality_gap(-3, -4) == pytest.approx(0.25)
    assert optimality_gap(0, 0) == 0.0
    assert optimality_gap(2, 0) == 1.0
