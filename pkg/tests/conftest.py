import itertools
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from qrelax.model import MAXIMIZE, IntegerProgram, evaluate

settings.register_profile("qrelax", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qrelax")


def enumerate_optimum(ip: IntegerProgram):
    """Independent reference: walk every point of the box through ``evaluate``."""
    best, arg = None, None
    sign = 1 if ip.sense == MAXIMIZE else -1
    ranges = [range(v.lower, v.upper + 1) for v in ip.variables]
    for point in itertools.product(*ranges):
        ev = evaluate(ip, dict(enumerate(point)))
        if ev.feasible and (best is None or sign * ev.objective > sign * best):
            best, arg = ev.objective, dict(enumerate(point))
    return best, arg


def bits_of(k: int, n: int) -> list[int]:
    return [(k >> i) & 1 for i in range(n)]


@pytest.fixture
def frac():
    return Fraction


def small_programs(max_vars: int = 4, max_upper: int = 3, max_rows: int = 3, binary: bool = False):
    """Hypothesis strategy for small bounded integer programs."""
    from hypothesis import strategies as st

    from qrelax.model import LinearConstraint, Variable

    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_vars))
        variables = []
        for k in range(n):
            lo = 0 if binary else draw(st.integers(0, 1))
            hi = lo + (1 if binary else draw(st.integers(1, max_upper)))
            variables.append(Variable(k, f"v{k}", lo, hi))
        coeff = st.integers(-4, 4)
        objective = {k: draw(coeff) for k in range(n)}
        rows = []
        for r in range(draw(st.integers(0, max_rows))):
            coeffs = {k: c for k in range(n) if (c := draw(coeff)) != 0}
            if not coeffs:
                continue
            rel = draw(st.sampled_from(["<=", ">=", "="]))
            rows.append(LinearConstraint(coeffs, rel, draw(st.integers(-3, 8)), f"r{r}"))
        sense = draw(st.sampled_from(["maximize", "minimize"]))
        return IntegerProgram(sense, objective, rows, variables)

    return build()
