"""Instance generators and brute-force oracles shared by the tests."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np
from hypothesis import strategies as st

from pid_opinion import InfluenceNetwork, OpinionDomain
from pid_opinion.cohesion import is_cohesive, is_strictly_cohesive
from pid_opinion.graph import random_network

F = Fraction

EX1_MATRIX = [
    [F(1, 5), F(1, 5), F(2, 5), F(1, 5)],
    [F(1, 5), F(1, 5), F(2, 5), F(1, 5)],
    [F(1, 4), F(1, 4), F(1, 4), F(1, 4)],
    [F(1, 4), F(1, 4), F(1, 4), F(1, 4)],
]
EX1_X0 = (-1, -1, 1, 2)


def ex1_net() -> InfluenceNetwork:
    return InfluenceNetwork.from_matrix(EX1_MATRIX)


def ex1_dom() -> OpinionDomain:
    return OpinionDomain(-1, 2, 0)


def heavy_network(n: int, rng: np.random.Generator, hamiltonian: bool = True) -> InfluenceNetwork:
    """Every node sends weight > 1/2 to one successor.

    With ``hamiltonian`` the successors form one cycle through all nodes;
    otherwise they are an arbitrary random map (possibly several cycles).
    """
    if hamiltonian:
        order = rng.permutation(n)
        succ = {int(order[k]): int(order[(k + 1) % n]) for k in range(n)}
    else:
        succ = {i: int(rng.integers(n)) for i in range(n)}
    rows = []
    for i in range(n):
        heavy = int(rng.integers(3, 7))
        row = {succ[i]: F(heavy)}
        rest = [j for j in range(n) if j != succ[i]]
        budget = heavy - 1
        for j in rng.permutation(rest)[: int(rng.integers(0, len(rest) + 1))]:
            if budget == 0:
                break
            u = int(rng.integers(1, budget + 1))
            row[int(j)] = F(u)
            budget -= u
        total = sum(row.values())
        rows.append({j: w / total for j, w in row.items()})
    return InfluenceNetwork.from_rows(rows)


def any_network(n: int, rng: np.random.Generator) -> InfluenceNetwork:
    """Mix of generic sparse networks and planted heavy-edge structures."""
    kind = rng.integers(4)
    if kind == 0:
        return heavy_network(n, rng, hamiltonian=True)
    if kind == 1:
        return heavy_network(n, rng, hamiltonian=False)
    return random_network(n, rng, max_out=int(rng.integers(1, n + 1)))


def random_domain(rng: np.random.Generator, o_max: int, lo: int | None = None) -> OpinionDomain:
    size = int(rng.integers(1, o_max + 1))
    lo = int(rng.integers(-3, 3)) if lo is None else lo
    return OpinionDomain(lo, lo + size - 1, lo + int(rng.integers(size)))


def random_state(rng: np.random.Generator, dom: OpinionDomain, n: int) -> tuple[int, ...]:
    return tuple(int(v) for v in rng.integers(dom.lo, dom.hi + 1, size=n))


def random_instance(rng: np.random.Generator, n_max: int, o_max: int, n_min: int = 1):
    n = int(rng.integers(n_min, n_max + 1))
    net = any_network(n, rng)
    dom = random_domain(rng, o_max)
    return net, dom, random_state(rng, dom, n)


def nonempty_subsets(n: int):
    for k in range(1, n + 1):
        yield from combinations(range(n), k)


def brute_only_cohesive_is_V(net: InfluenceNetwork) -> bool:
    return not any(is_cohesive(net, s) for s in nonempty_subsets(net.n) if len(s) < net.n)


def brute_strictly_cohesive_sets(net: InfluenceNetwork) -> list[tuple[int, ...]]:
    return [s for s in nonempty_subsets(net.n) if is_strictly_cohesive(net, s)]


def brute_expansion(net: InfluenceNetwork, members) -> frozenset[int]:
    """Fixed point of adding every node with weight >= 1/2 into the set, all at once per round."""
    cur = frozenset(members)
    while True:
        nxt = cur | {i for i in range(net.n) if 2 * net.weight_into(i, cur) >= 1}
        if nxt == cur:
            return cur
        cur = nxt


def brute_pareto(net, dom, x, i) -> list[int]:
    """Opinions that weakly improve both costs, by direct evaluation in Fractions."""
    def social(z):
        return sum(net.weight(i, j) * abs(z - x[j]) for j in range(net.n))

    return [
        z for z in dom.opinions()
        if abs(z - dom.theta) <= abs(x[i] - dom.theta) and social(z) <= social(x[i])
    ]


@st.composite
def networks(draw, max_n: int = 6, min_n: int = 1):
    """Row-stochastic networks with small integer units per edge, so ties at 1/2 are common."""
    n = draw(st.integers(min_n, max_n))
    rows = []
    for _ in range(n):
        units = draw(st.dictionaries(st.integers(0, n - 1), st.integers(1, 4), min_size=1, max_size=n))
        total = sum(units.values())
        rows.append({j: Fraction(u, total) for j, u in units.items()})
    return InfluenceNetwork.from_rows(rows)


@st.composite
def instances(draw, max_n: int = 6, max_o: int = 5):
    net = draw(networks(max_n))
    lo = draw(st.integers(-3, 3))
    hi = lo + draw(st.integers(0, max_o - 1))
    theta = draw(st.integers(lo, hi))
    x = tuple(draw(st.lists(st.integers(lo, hi), min_size=net.n, max_size=net.n)))
    return net, OpinionDomain(lo, hi, theta), x
