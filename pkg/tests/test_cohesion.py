from fractions import Fraction as F
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_expansion, brute_strictly_cohesive_sets, networks, nonempty_subsets
from pid_opinion import cohesion
from pid_opinion.errors import BudgetExceededError
from pid_opinion.graph import InfluenceNetwork


def one(*ids):
    """1-based ids as written in the worked examples, to 0-based."""
    return tuple(i - 1 for i in ids)


def cycle(n):
    return InfluenceNetwork.from_rows([{(i + 1) % n: 1} for i in range(n)])


def test_cohesive_examples(ex1):
    assert cohesion.is_cohesive(ex1, range(4))
    assert cohesion.is_cohesive(ex1, one(3, 4))
    assert not cohesion.is_cohesive(ex1, one(1, 2))
    assert cohesion.is_cohesive(ex1, ())


def test_strictly_cohesive_examples(ex1):
    assert cohesion.is_strictly_cohesive(ex1, range(4))
    assert not cohesion.is_strictly_cohesive(ex1, one(3, 4))
    assert cohesion.is_strictly_cohesive(ex1, one(1, 3, 4))
    assert cohesion.is_strictly_cohesive(ex1, ())


def test_ids_are_checked(ex1):
    with pytest.raises(ValueError):
        cohesion.is_cohesive(ex1, [4])
    with pytest.raises(ValueError):
        cohesion.cohesive_expansion(ex1, [-1])


def test_expansion_examples(ex1):
    assert cohesion.cohesive_expansion(ex1, ()) == ()
    assert cohesion.cohesive_expansion(ex1, range(4)) == (0, 1, 2, 3)
    assert set(cohesion.cohesive_expansion(ex1, one(3, 4))) == set(range(4))
    assert cohesion.expansion_order(ex1, one(3, 4)) == [0, 1]


@given(networks(max_n=8), st.data())
def test_expansion_monotone_and_order_free(net, data):
    small = data.draw(st.sets(st.integers(0, net.n - 1)))
    big = small | data.draw(st.sets(st.integers(0, net.n - 1)))
    ex_small = set(cohesion.cohesive_expansion(net, small))
    assert ex_small == brute_expansion(net, small)
    assert ex_small <= set(cohesion.cohesive_expansion(net, big))
    seed = data.draw(st.integers(0, 2**32 - 1))
    assert set(cohesion.cohesive_expansion(net, small, rng=np.random.default_rng(seed))) == ex_small


@settings(max_examples=60)
@given(networks(max_n=7))
def test_strict_implies_cohesive(net):
    for s in nonempty_subsets(net.n):
        if cohesion.is_strictly_cohesive(net, s):
            assert cohesion.is_cohesive(net, s)


@settings(max_examples=80)
@given(networks(max_n=7), st.data())
def test_peeling_finds_largest_strictly_cohesive_subset(net, data):
    members = data.draw(st.sets(st.integers(0, net.n - 1)))
    inside = [s for s in brute_strictly_cohesive_sets(net) if set(s) <= members]
    union = set().union(*inside) if inside else set()
    assert set(cohesion.largest_strictly_cohesive_subset(net, members)) == union


def test_enumeration_examples(ex1):
    assert cohesion.enumerate_minimal_strictly_cohesive(cycle(3)) == [(0, 1, 2)]
    assert cohesion.enumerate_minimal_strictly_cohesive(ex1) == [one(1, 2, 3), one(1, 2, 4), one(1, 3, 4), one(2, 3, 4)]
    assert cohesion.enumerate_minimal_strictly_cohesive(InfluenceNetwork.from_rows([{0: 1}])) == [(0,)]


def test_enumeration_budget():
    big = cycle(21)
    with pytest.raises(BudgetExceededError, match="exact enumeration refused"):
        cohesion.enumerate_minimal_strictly_cohesive(big)
    with pytest.raises(BudgetExceededError):
        cohesion.minimum_seed_sets(cycle(6), node_budget=5)


@settings(max_examples=60)
@given(networks(max_n=7))
def test_enumeration_matches_brute_force(net):
    family = brute_strictly_cohesive_sets(net)
    minimal = [s for s in family if not any(set(t) < set(s) for t in family)]
    assert sorted(cohesion.enumerate_minimal_strictly_cohesive(net), key=lambda s: (len(s), s)) == sorted(
        minimal, key=lambda s: (len(s), s)
    )
    assert cohesion.only_scs_is_V(net) == (family == [tuple(range(net.n))])


def test_only_scs_is_v_examples(ex1):
    assert cohesion.only_scs_is_V(cycle(3))
    assert not cohesion.only_scs_is_V(ex1)
    assert not cohesion.only_scs_is_V(InfluenceNetwork.from_rows([{0: 1}, {0: F(1, 2), 1: F(1, 2)}]))
    assert cohesion.only_scs_is_V(cycle(200))


def test_heavy_cycle_examples(ex1):
    assert cohesion.heavy_edge_cycle_check(cycle(5))
    assert not cohesion.heavy_edge_cycle_check(ex1)
    two_pairs = InfluenceNetwork.from_rows([{1: 1}, {0: 1}, {3: 1}, {2: 1}])
    assert not cohesion.heavy_edge_cycle_check(two_pairs)


def test_seed_examples(ex1):
    assert cohesion.verify_seed_set(ex1, range(4))
    assert not cohesion.verify_seed_set(ex1, one(1))
    assert cohesion.uncovered_strictly_cohesive_set(ex1, one(1)) == one(2, 3, 4)
    assert cohesion.verify_seed_set(ex1, one(1, 2))
    assert cohesion.uncovered_strictly_cohesive_set(ex1, one(1, 2)) is None


@settings(max_examples=60)
@given(networks(max_n=7), st.data())
def test_verify_seed_set_matches_enumeration(net, data):
    seeds = data.draw(st.sets(st.integers(0, net.n - 1)))
    expect = all(set(s) & seeds for s in brute_strictly_cohesive_sets(net))
    assert cohesion.verify_seed_set(net, seeds) == expect


def test_minimum_seed_examples(ex1):
    res = cohesion.minimum_seed_sets(ex1)
    assert res.size == 2
    assert {one(1, 2), one(1, 3), one(3, 4)} <= set(res.witnesses)
    assert cohesion.minimum_seed_sets(cycle(4)).size == 1
    loops = InfluenceNetwork.from_rows([{0: 1}, {1: 1}])
    assert cohesion.minimum_seed_sets(loops).witnesses == [(0, 1)]
    capped = cohesion.minimum_seed_sets(ex1, max_witnesses=2)
    assert capped.truncated and len(capped.witnesses) == 2


@settings(max_examples=40)
@given(networks(max_n=6))
def test_minimum_seed_sets_are_minimum(net):
    res = cohesion.minimum_seed_sets(net)
    assert all(cohesion.verify_seed_set(net, w) for w in res.witnesses)
    assert not any(cohesion.verify_seed_set(net, c) for c in combinations(range(net.n), res.size - 1))


def test_report(ex1):
    rep = cohesion.analyze(ex1)
    assert rep.exact and rep.min_seed_size == 2 and not rep.only_scs_is_V
    js = rep.to_json()
    assert js["minimal_strictly_cohesive"][0] == [1, 2, 3]
    ring = cohesion.analyze(cycle(4))
    assert ring.only_scs_is_V and ring.minimal_strictly_cohesive == [(0, 1, 2, 3)] and ring.min_seed_size == 1
    big = cohesion.analyze(InfluenceNetwork.from_rows([{i: 1} for i in range(25)]), node_budget=20)
    assert not big.exact and big.min_seed_size is None
    assert [len(s) for s in big.minimal_strictly_cohesive] == [1]
