"""Cohesive and strictly cohesive node sets, cohesive expansion, seeding analysis.

A set M is cohesive when every member puts weight >= 1/2 on M, strictly
cohesive when every member puts weight > 1/2 on M; the empty set is both.
All comparisons run on integer numerators (``2 * num`` vs ``den``), so the
1/2 boundary is exact.

Node sets are returned as sorted tuples of 0-based ids.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

import numpy as np

from .errors import BudgetExceededError
from .graph import InfluenceNetwork

log = logging.getLogger(__name__)

NodeSet = tuple[int, ...]

DEFAULT_NODE_BUDGET = 20


def _check_ids(net: InfluenceNetwork, members: Iterable[int]) -> frozenset[int]:
    s = frozenset(int(v) for v in members)
    for v in s:
        if not 0 <= v < net.n:
            raise ValueError(f"node id {v} out of range [0, {net.n})")
    return s


def _twice_weight_into(net: InfluenceNetwork, i: int, members) -> tuple[int, int]:
    """``(2 * num, den)`` where ``num/den`` is node i's weight on ``members``."""
    den, row = net.integer_rows[i]
    return 2 * sum(num for j, num in row if j in members), den


def is_cohesive(net: InfluenceNetwork, members: Iterable[int]) -> bool:
    m = _check_ids(net, members)
    for i in m:
        twice, den = _twice_weight_into(net, i, m)
        if twice < den:
            return False
    return True


def is_strictly_cohesive(net: InfluenceNetwork, members: Iterable[int]) -> bool:
    m = _check_ids(net, members)
    for i in m:
        twice, den = _twice_weight_into(net, i, m)
        if twice <= den:
            return False
    return True


def expansion_order(
    net: InfluenceNetwork, members: Iterable[int], rng: np.random.Generator | None = None
) -> list[int]:
    """Nodes added by the cohesive-expansion iteration, in the order they join.

    A node outside the current set joins when its weight on the set is >= 1/2.
    Among eligible nodes the lowest id joins first, or a uniformly random one
    when ``rng`` is given.
    """
    current = set(_check_ids(net, members))
    order = []
    while True:
        eligible = []
        for i in range(net.n):
            if i in current:
                continue
            twice, den = _twice_weight_into(net, i, current)
            if twice >= den:
                eligible.append(i)
                if rng is None:
                    break
        if not eligible:
            return order
        pick = eligible[0] if rng is None else eligible[int(rng.integers(len(eligible)))]
        current.add(pick)
        order.append(pick)


def cohesive_expansion(
    net: InfluenceNetwork, members: Iterable[int], rng: np.random.Generator | None = None
) -> NodeSet:
    members = _check_ids(net, members)
    return tuple(sorted(members.union(expansion_order(net, members, rng))))


def largest_strictly_cohesive_subset(net: InfluenceNetwork, members: Iterable[int]) -> NodeSet:
    """Union of all strictly cohesive subsets of ``members`` (itself strictly cohesive).

    Peels off members whose weight on the remaining set is <= 1/2 until none
    is left to peel. Strictly cohesive sets are closed under union, so the
    survivor is the largest one; it is empty iff ``members`` contains no
    non-empty strictly cohesive set.
    """
    current = set(_check_ids(net, members))
    changed = True
    while changed:
        changed = False
        for i in sorted(current):
            twice, den = _twice_weight_into(net, i, current)
            if twice <= den:
                current.discard(i)
                changed = True
    return tuple(sorted(current))


def minimal_strictly_cohesive_witness(net: InfluenceNetwork, members: Iterable[int]) -> NodeSet | None:
    """An inclusion-minimal non-empty strictly cohesive subset of ``members``, or None."""
    current = largest_strictly_cohesive_subset(net, members)
    if not current:
        return None
    shrinking = True
    while shrinking:
        shrinking = False
        for v in current:
            rest = largest_strictly_cohesive_subset(net, [u for u in current if u != v])
            if rest:
                current = rest
                shrinking = True
                break
    return current


def _mask_rows(net: InfluenceNetwork) -> list[tuple[int, list[tuple[int, int]]]]:
    return [(den, [(1 << j, num) for j, num in row]) for den, row in net.integer_rows]


def _mask_strictly_cohesive(rows, mask: int) -> bool:
    m = mask
    while m:
        low = m & -m
        den, row = rows[low.bit_length() - 1]
        if 2 * sum(num for bit, num in row if mask & bit) <= den:
            return False
        m ^= low
    return True


def _bits(mask: int) -> NodeSet:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _require_budget(net: InfluenceNetwork, node_budget: int) -> None:
    if net.n > node_budget:
        raise BudgetExceededError(
            f"exact enumeration refused: n={net.n} exceeds node budget {node_budget}"
        )


def enumerate_minimal_strictly_cohesive(
    net: InfluenceNetwork, node_budget: int = DEFAULT_NODE_BUDGET
) -> list[NodeSet]:
    """All inclusion-minimal non-empty strictly cohesive sets, by size then lexicographically.

    Exponential in n; refuses networks larger than ``node_budget``.
    """
    _require_budget(net, node_budget)
    rows = _mask_rows(net)
    found: list[int] = []
    for k in range(1, net.n + 1):
        for combo in combinations(range(net.n), k):
            mask = 0
            for v in combo:
                mask |= 1 << v
            if any(f & mask == f for f in found):
                continue
            if _mask_strictly_cohesive(rows, mask):
                found.append(mask)
    return [_bits(m) for m in found]


def only_scs_is_V(net: InfluenceNetwork) -> bool:
    """True iff the whole node set is the only non-empty strictly cohesive set.

    Any proper strictly cohesive set misses some node v, so it suffices to
    peel ``V - {v}`` for each v.
    """
    everyone = range(net.n)
    return all(not largest_strictly_cohesive_subset(net, [u for u in everyone if u != v]) for v in everyone)


def heavy_edge_cycle_check(net: InfluenceNetwork) -> bool:
    """True iff the edges with weight > 1/2 form one directed cycle through every node."""
    succ = [-1] * net.n
    for i, (den, row) in enumerate(net.integer_rows):
        for j, num in row:
            if 2 * num > den:
                succ[i] = j
        if succ[i] < 0:
            return False
    if sorted(succ) != list(range(net.n)):
        return False
    length, v = 0, 0
    while True:
        v = succ[v]
        length += 1
        if v == 0:
            return length == net.n


def uncovered_strictly_cohesive_set(net: InfluenceNetwork, seeds: Iterable[int]) -> NodeSet | None:
    """A minimal strictly cohesive set avoiding every seed, or None if the seeds hit them all."""
    seeds = _check_ids(net, seeds)
    return minimal_strictly_cohesive_witness(net, [v for v in range(net.n) if v not in seeds])


def verify_seed_set(net: InfluenceNetwork, seeds: Iterable[int]) -> bool:
    """True iff every non-empty strictly cohesive set contains a seed."""
    return uncovered_strictly_cohesive_set(net, seeds) is None


@dataclass
class SeedSearch:
    size: int
    witnesses: list[NodeSet]
    truncated: bool


def minimum_seed_sets(
    net: InfluenceNetwork,
    node_budget: int = DEFAULT_NODE_BUDGET,
    max_witnesses: int = 100,
    family: list[NodeSet] | None = None,
) -> SeedSearch:
    """Minimum-cardinality seed sets, i.e. minimum hitting sets of the minimal strictly cohesive family."""
    if family is None:
        family = enumerate_minimal_strictly_cohesive(net, node_budget)
    else:
        _require_budget(net, node_budget)
    masks = [sum(1 << v for v in s) for s in family]
    for k in range(1, net.n + 1):
        hits: list[NodeSet] = []
        truncated = False
        for combo in combinations(range(net.n), k):
            mask = sum(1 << v for v in combo)
            if all(mask & f for f in masks):
                if len(hits) == max_witnesses:
                    truncated = True
                    break
                hits.append(combo)
        if hits:
            return SeedSearch(k, hits, truncated)
    raise AssertionError("the full node set always hits every non-empty set")


@dataclass
class CohesionReport:
    n: int
    minimal_strictly_cohesive: list[NodeSet]
    only_scs_is_V: bool
    heavy_cycle: bool
    min_seed_size: int | None
    min_seed_sets: list[NodeSet] = field(default_factory=list)
    seed_sets_truncated: bool = False
    exact: bool = True

    def to_json(self) -> dict:
        """JSON-ready dict with 1-based node ids."""

        def one_based(sets):
            return [[v + 1 for v in s] for s in sets]

        return {
            "n": self.n,
            "minimal_strictly_cohesive": one_based(self.minimal_strictly_cohesive),
            "only_scs_is_V": self.only_scs_is_V,
            "heavy_cycle": self.heavy_cycle,
            "min_seed_size": self.min_seed_size,
            "min_seed_sets": one_based(self.min_seed_sets),
            "seed_sets_truncated": self.seed_sets_truncated,
            "exact": self.exact,
        }


def analyze(
    net: InfluenceNetwork, node_budget: int = DEFAULT_NODE_BUDGET, max_witnesses: int = 100
) -> CohesionReport:
    only_v = only_scs_is_V(net)
    heavy = heavy_edge_cycle_check(net)
    everyone = tuple(range(net.n))
    if only_v:
        singles = [(v,) for v in everyone]
        return CohesionReport(
            net.n, [everyone], True, heavy, 1, singles[:max_witnesses], len(singles) > max_witnesses
        )
    if net.n > node_budget:
        log.warning("n=%d exceeds node budget %d; reporting one witness only", net.n, node_budget)
        witness = minimal_strictly_cohesive_witness(net, everyone)
        return CohesionReport(net.n, [witness], False, heavy, None, exact=False)
    family = enumerate_minimal_strictly_cohesive(net, node_budget)
    seeds = minimum_seed_sets(net, node_budget, max_witnesses, family=family)
    return CohesionReport(net.n, family, False, heavy, seeds.size, seeds.witnesses, seeds.truncated)
