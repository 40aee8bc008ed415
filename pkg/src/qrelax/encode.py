"""From integer programs to Hamiltonians.

binarize -> penalty QUBO -> Ising -> instance graph -> LDF coloring ->
qubit layout -> relaxed (3,1)-QRAC Hamiltonian, or the plain diagonal
Hamiltonian for QAOA.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from .model import MAXIMIZE, IntegerProgram, LinearConstraint, ModelError, Variable

SQRT3 = math.sqrt(3.0)
AXES = ("X", "Y", "Z")


class EncodingError(ValueError):
    pass


# ---------------------------------------------------------------------------
# binarization


@dataclass(frozen=True)
class Binarization:
    bits: dict[int, list[tuple[int, int]]]  # source id -> [(binary id, weight)]
    lower: dict[int, int]
    n_binary: int

    def decode(self, assignment: Mapping[int, int]) -> dict[int, int]:
        return {
            src: self.lower[src] + sum(w * int(assignment[b]) for b, w in pairs)
            for src, pairs in self.bits.items()
        }

    def encode(self, values: Mapping[int, int]) -> dict[int, int]:
        out = {}
        for src, pairs in self.bits.items():
            rest = values[src] - self.lower[src]
            for b, w in pairs:
                out[b] = (rest // w) & 1
        return out

    @property
    def offset_terms(self) -> dict[int, int]:
        return self.lower


def binarize(ip: IntegerProgram) -> tuple[IntegerProgram, Binarization]:
    """Replace each bounded integer variable by weighted binaries.

    A variable of width ``u = upper - lower`` becomes ``ceil(log2(u + 1))``
    bits with weights 1, 2, 4, ...; a bound row ``sum w b <= u`` is added
    unless ``u`` is one less than a power of two. The objective constant
    from nonzero lower bounds is dropped (see ``objective_offset``).

    Bits get ids most significant first. Bland's rule then prefers the high
    bit when pricing ties, which keeps LP optima at the plain binary vertex
    (y = 2 as b1 = 1, b0 = 0) instead of the bound-row vertex b0 = 1,
    b1 = 0.5, whose rounding strands the residual.
    """
    bits: dict[int, list[tuple[int, int]]] = {}
    lower: dict[int, int] = {}
    variables: list[Variable] = []
    bound_rows: list[LinearConstraint] = []
    for var in ip.variables:
        width = var.upper - var.lower
        lower[var.id] = var.lower
        k = math.ceil(math.log2(width + 1)) if width > 0 else 0
        pairs = []
        for t in reversed(range(k)):
            bid = len(variables)
            name = var.name if (var.is_binary and k == 1) else f"{var.name}#b{t}"
            variables.append(Variable(bid, name))
            pairs.append((bid, 1 << t))
        bits[var.id] = pairs
        if k and (1 << k) - 1 > width:
            bound_rows.append(LinearConstraint(dict(pairs), "<=", width, f"bound[{var.name}]"))

    def expand(coeffs: Mapping[int, Fraction]) -> tuple[dict[int, Fraction], Fraction]:
        out: dict[int, Fraction] = {}
        const = Fraction(0)
        for k, c in coeffs.items():
            const += c * lower[k]
            for b, w in bits[k]:
                out[b] = out.get(b, Fraction(0)) + c * w
        return out, const

    objective, _ = expand(ip.objective)
    constraints = []
    for con in ip.constraints:
        coeffs, const = expand(con.coefficients)
        if not any(coeffs.values()):
            probe = LinearConstraint({0: 1}, con.relation, con.rhs - const)
            if not probe.satisfied_by(Fraction(0)):
                raise ModelError(f"constraint {con.name!r} is violated by fixed variables")
            continue
        constraints.append(LinearConstraint(coeffs, con.relation, con.rhs - const, con.name))
    constraints += bound_rows
    out = IntegerProgram(ip.sense, objective, constraints, variables, name=ip.name)
    return out, Binarization(bits, lower, len(variables))


def objective_offset(ip: IntegerProgram, binarization: Binarization) -> Fraction:
    return sum((c * binarization.lower[k] for k, c in ip.objective.items()), Fraction(0))


# ---------------------------------------------------------------------------
# QUBO


@dataclass(frozen=True)
class Slack:
    constraint: str
    ids: tuple[int, ...]
    weights: tuple[int, ...]


@dataclass(frozen=True)
class Qubo:
    """Maximization form ``constant + sum linear_i x_i + sum_{i<j} quadratic_ij x_i x_j``.

    Variables ``0..n_problem-1`` are the program's binaries, the rest slack.
    """

    n: int
    linear: dict[int, Fraction]
    quadratic: dict[tuple[int, int], Fraction]
    constant: Fraction = Fraction(0)
    n_problem: int = 0
    penalty: Fraction = Fraction(0)
    slacks: tuple[Slack, ...] = ()
    sense_sign: int = 1  # +1 if the source program maximizes

    def value(self, x: Sequence[int]) -> Fraction:
        v = self.constant
        for i, c in self.linear.items():
            if x[i]:
                v += c
        for (i, j), c in self.quadratic.items():
            if x[i] and x[j]:
                v += c
        return v

    def arrays(self) -> tuple[float, np.ndarray, np.ndarray]:
        lin = np.zeros(self.n)
        quad = np.zeros((self.n, self.n))
        for i, c in self.linear.items():
            lin[i] = float(c)
        for (i, j), c in self.quadratic.items():
            quad[i, j] = float(c)
        return float(self.constant), lin, quad

    def values(self, X: np.ndarray) -> np.ndarray:
        """Float values for each row of a 0/1 matrix."""
        c, lin, quad = self.arrays()
        X = X.astype(float)
        return c + X @ lin + np.einsum("ki,ij,kj->k", X, quad, X)


def _integer_row(con: LinearConstraint) -> tuple[dict[int, int], Fraction]:
    scale = 1
    for c in con.coefficients.values():
        scale = math.lcm(scale, c.denominator)
    ints = {k: int(c * scale) for k, c in con.coefficients.items()}
    g = 0
    for v in ints.values():
        g = math.gcd(g, abs(v))
    return {k: v // g for k, v in ints.items()}, con.rhs * scale / g


def slack_weights(span: int) -> list[int]:
    """Binary expansion covering exactly ``0..span`` (last weight truncated)."""
    if span <= 0:
        return []
    k = math.ceil(math.log2(span + 1))
    weights = [1 << t for t in range(k - 1)]
    weights.append(span - ((1 << (k - 1)) - 1))
    return weights


def achievable_sums(coefficients) -> list[int]:
    """Sorted distinct values of ``sum a_k x_k`` over binary ``x`` (subset sum)."""
    coefficients = list(coefficients)
    neg = sum(a for a in coefficients if a < 0)
    bits = 1  # bit v set <=> value v + neg reachable
    for a in coefficients:
        bits |= bits << abs(a)
    out, v = [], 0
    while bits:
        if bits & 1:
            out.append(v + neg)
        bits >>= 1
        v += 1
    return out


def auto_penalty(ip: IntegerProgram) -> Fraction:
    return 1 + sum((abs(c) for c in ip.objective.values()), Fraction(0))


def to_qubo(ip: IntegerProgram, penalty="auto") -> Qubo:
    """Penalty QUBO of a binary program, normalized to maximization.

    Each constraint is scaled to coprime integer coefficients, turned into an
    equality with bounded binary slack, and contributes ``-M * g(x, s)**2``.
    Rows that hold everywhere on the box are dropped.
    """
    if not ip.is_binary:
        raise EncodingError("to_qubo needs a binary program; binarize first")
    sign = 1 if ip.sense == MAXIMIZE else -1
    M = auto_penalty(ip) if penalty == "auto" else Fraction(penalty)
    n = ip.n
    linear: dict[int, Fraction] = {k: sign * c for k, c in ip.objective.items()}
    quadratic: dict[tuple[int, int], Fraction] = {}
    constant = Fraction(0)
    slacks = []

    for idx, con in enumerate(ip.constraints):
        name = con.name or f"c{idx}"
        row, rhs = _integer_row(con)
        reach = achievable_sums(row.values())
        lo, hi = min(reach), max(reach)
        if con.relation == "<=":
            r = math.floor(rhs)
            if hi <= r:
                continue
            ok = [v for v in reach if v <= r]
        elif con.relation == ">=":
            r = math.ceil(rhs)
            if lo >= r:
                continue
            ok = [v for v in reach if v >= r]
        else:
            r = int(rhs) if rhs.denominator == 1 else None
            ok = [r] if r in reach else []
        if not ok:
            raise EncodingError(f"constraint {name} infeasible over box")
        # slack = |r - lhs| over the achievable feasible lhs values
        if con.relation == ">=":
            slack_sign, base, span = -1, min(ok) - r, max(ok) - min(ok)
        else:
            slack_sign, base, span = 1, r - max(ok), max(ok) - min(ok)
        r -= slack_sign * base
        terms = dict(row)
        weights = slack_weights(span)
        ids = tuple(range(n, n + len(weights)))
        for s, w in zip(ids, weights):
            terms[s] = slack_sign * w
        n += len(weights)
        if weights:
            slacks.append(Slack(name, ids, tuple(weights)))
        # -M (sum a_k z_k - r)^2 with z_k^2 = z_k
        keys = sorted(terms)
        for a_pos, k in enumerate(keys):
            a = terms[k]
            linear[k] = linear.get(k, Fraction(0)) - M * (a * a - 2 * r * a)
            for l in keys[a_pos + 1 :]:
                quadratic[(k, l)] = quadratic.get((k, l), Fraction(0)) - 2 * M * a * terms[l]
        constant -= M * r * r

    linear = {k: v for k, v in sorted(linear.items()) if v != 0}
    quadratic = {k: v for k, v in sorted(quadratic.items()) if v != 0}
    return Qubo(n, linear, quadratic, constant, ip.n, M, tuple(slacks), sign)


# ---------------------------------------------------------------------------
# Ising


@dataclass(frozen=True)
class IsingHamiltonian:
    """``offset + sum h_i s_i + sum_{i<j} J_ij s_i s_j`` with ``s_i = (-1)**x_i``."""

    n: int
    h: dict[int, Fraction]
    J: dict[tuple[int, int], Fraction]
    offset: Fraction = Fraction(0)

    def value(self, s: Sequence[int]) -> Fraction:
        v = self.offset
        for i, c in self.h.items():
            v += c * s[i]
        for (i, j), c in self.J.items():
            v += c * s[i] * s[j]
        return v

    def value_bits(self, x: Sequence[int]) -> Fraction:
        return self.value([1 - 2 * int(b) for b in x])


def to_ising(q: Qubo) -> IsingHamiltonian:
    h: dict[int, Fraction] = {}
    J: dict[tuple[int, int], Fraction] = {}
    offset = Fraction(q.constant)
    for i, a in q.linear.items():
        offset += a / 2
        h[i] = h.get(i, Fraction(0)) - a / 2
    for (i, j), b in q.quadratic.items():
        offset += b / 4
        h[i] = h.get(i, Fraction(0)) - b / 4
        h[j] = h.get(j, Fraction(0)) - b / 4
        J[(i, j)] = b / 4
    h = {k: v for k, v in sorted(h.items()) if v != 0}
    J = {k: v for k, v in sorted(J.items()) if v != 0}
    return IsingHamiltonian(q.n, h, J, offset)


# ---------------------------------------------------------------------------
# graph, coloring, layout


def build_instance_graph(ising: IsingHamiltonian) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(ising.n))
    g.add_edges_from(ising.J)
    return g


def color_ldf(graph: nx.Graph) -> dict[int, int]:
    """Greedy coloring in nonincreasing degree order, ties by vertex id."""
    order = sorted(graph.nodes, key=lambda v: (-graph.degree[v], v))
    colors: dict[int, int] = {}
    for v in order:
        used = {colors[u] for u in graph.neighbors(v) if u in colors}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    return dict(sorted(colors.items()))


@dataclass(frozen=True)
class QubitLayout:
    colors: dict[int, int]
    assignment: dict[int, tuple[int, str]]  # vertex -> (qubit, axis)
    qubit_count: int

    def on_qubit(self, q: int) -> list[int]:
        return [v for v, (qq, _) in self.assignment.items() if qq == q]

    def check(self, graph: nx.Graph | None = None) -> None:
        per_qubit: dict[int, list[int]] = {}
        for v, (q, _) in self.assignment.items():
            per_qubit.setdefault(q, []).append(v)
        for q, vs in per_qubit.items():
            if len(vs) > 3:
                raise EncodingError(f"qubit {q} holds {len(vs)} vertices")
            if len({self.colors[v] for v in vs}) != 1:
                raise EncodingError(f"qubit {q} mixes colors")
            if len({self.assignment[v][1] for v in vs}) != len(vs):
                raise EncodingError(f"qubit {q} repeats an axis")
        if graph is not None:
            for u, v in graph.edges:
                if self.colors[u] == self.colors[v]:
                    raise EncodingError(f"edge ({u},{v}) joins equal colors")


def assign_qubits(coloring: Mapping[int, int]) -> QubitLayout:
    """Pack each color class, sorted by vertex id, into qubits three at a time
    with axes X, Y, Z."""
    classes: dict[int, list[int]] = {}
    for v, c in coloring.items():
        classes.setdefault(c, []).append(v)
    assignment = {}
    q = 0
    for c in sorted(classes):
        members = sorted(classes[c])
        for start in range(0, len(members), 3):
            for axis, v in zip(AXES, members[start : start + 3]):
                assignment[v] = (q, axis)
            q += 1
    return QubitLayout(dict(coloring), dict(sorted(assignment.items())), q)


def one_per_qubit(n: int) -> QubitLayout:
    return QubitLayout({v: v for v in range(n)}, {v: (v, "Z") for v in range(n)}, n)


# ---------------------------------------------------------------------------
# Pauli Hamiltonians


PauliString = tuple[tuple[int, str], ...]


@dataclass(frozen=True)
class PauliHamiltonian:
    n_qubits: int
    terms: tuple[tuple[float, PauliString], ...]
    offset: float = 0.0

    def dump(self) -> str:
        """``coeff axis@qubit [axis@qubit]`` per term, then ``offset <value>``."""
        lines = []
        for coef, string in self.terms:
            ops = " ".join(f"{a}@{q}" for q, a in string)
            lines.append(f"{coef:.12g} {ops}")
        lines.append(f"offset {self.offset:.12g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str, n_qubits: int | None = None) -> "PauliHamiltonian":
        terms = []
        offset = 0.0
        width = 0
        for line in text.strip().splitlines():
            head, *ops = line.split()
            if head == "offset":
                offset = float(ops[0])
                continue
            string = []
            for op in ops:
                a, q = op.split("@")
                string.append((int(q), a))
                width = max(width, int(q) + 1)
            terms.append((float(head), tuple(string)))
        return cls(n_qubits if n_qubits is not None else width, tuple(terms), offset)


def _sorted_terms(terms: dict[PauliString, float]) -> tuple[tuple[float, PauliString], ...]:
    items = [(s, c) for s, c in terms.items() if c != 0.0]
    items.sort(key=lambda it: (tuple(q for q, _ in it[0]), tuple(a for _, a in it[0])))
    return tuple((c, s) for s, c in items)


def relax_hamiltonian(ising: IsingHamiltonian, layout: QubitLayout) -> PauliHamiltonian:
    """Replace ``s_i`` by ``sqrt(3) P_i`` and ``s_i s_j`` by ``3 P_i P_j``."""
    terms: dict[PauliString, float] = {}
    for i, c in ising.h.items():
        q, a = layout.assignment[i]
        terms[((q, a),)] = SQRT3 * float(c)
    for (i, j), c in ising.J.items():
        qi, ai = layout.assignment[i]
        qj, aj = layout.assignment[j]
        if qi == qj:
            raise EncodingError(f"coupled spins {i} and {j} share qubit {qi}")
        string = tuple(sorted(((qi, ai), (qj, aj))))
        terms[string] = 3.0 * float(c)
    return PauliHamiltonian(layout.qubit_count, _sorted_terms(terms), float(ising.offset))


def diagonal_hamiltonian(ising: IsingHamiltonian) -> PauliHamiltonian:
    terms: dict[PauliString, float] = {}
    for i, c in ising.h.items():
        terms[((i, "Z"),)] = float(c)
    for (i, j), c in ising.J.items():
        terms[((i, "Z"), (j, "Z"))] = float(c)
    return PauliHamiltonian(ising.n, _sorted_terms(terms), float(ising.offset))


# ---------------------------------------------------------------------------
# full encoding


@dataclass
class Encoding:
    source: IntegerProgram
    binarization: Binarization
    binary: IntegerProgram
    qubo: Qubo
    ising: IsingHamiltonian
    graph: nx.Graph
    layout: QubitLayout
    hamiltonian: PauliHamiltonian
    mode: str = "qrao"

    @property
    def qubit_count(self) -> int:
        return self.layout.qubit_count

    def decode(self, bits: Mapping[int, int] | Sequence[int]) -> dict[int, int]:
        """Strip slack bits and undo binarization."""
        problem = {k: int(bits[k]) for k in range(self.qubo.n_problem)}
        return self.binarization.decode(problem)


def encode_program(ip: IntegerProgram, mode: str = "qrao", penalty="auto") -> Encoding:
    binary, binarization = binarize(ip)
    qubo = to_qubo(binary, penalty)
    ising = to_ising(qubo)
    graph = build_instance_graph(ising)
    if mode == "qrao":
        layout = assign_qubits(color_ldf(graph))
        ham = relax_hamiltonian(ising, layout)
    elif mode == "qaoa":
        layout = one_per_qubit(ising.n)
        ham = diagonal_hamiltonian(ising)
    else:
        raise ValueError(f"unknown encoding mode {mode!r}")
    return Encoding(ip, binarization, binary, qubo, ising, graph, layout, ham, mode)
