"""Explicit legal update sequences: build, transform, verify.

An update sequence is a list of ``(node, new_opinion)`` events. It is legal
from ``x0`` when, replayed in order, every new opinion lies in the node's
Pareto-improvement set at that moment.

The constructors work in coordinates shifted so the truth is 0 (costs are
translation invariant) and shift back on output.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

from . import cohesion
from .dynamics import OpinionDomain, check_state, is_equilibrium, pareto_set
from .errors import PreconditionError
from .graph import InfluenceNetwork

log = logging.getLogger(__name__)

Event = tuple[int, int]


@dataclass
class Replay:
    legal: bool
    first_violation: int | None
    final: tuple[int, ...]


def verify_sequence_legal(
    net: InfluenceNetwork, dom: OpinionDomain, x0: Sequence[int], seq: Sequence[Event]
) -> Replay:
    """Replay ``seq`` from ``x0``; the final state is returned even past a violation."""
    x = list(check_state(net, dom, x0))
    first = None
    for k, (i, z) in enumerate(seq):
        if not 0 <= i < net.n:
            raise ValueError(f"event {k}: node {i} out of range [0, {net.n})")
        if first is None and not (z in dom and z in pareto_set(net, dom, x, i)):
            first = k
        x[i] = z
    return Replay(first is None, first, tuple(x))


def is_crossing(before: int, after: int, theta: int) -> bool:
    return (before - theta) * (after - theta) < 0


def count_crossings(x0: Sequence[int], seq: Sequence[Event], theta: int) -> int:
    x = list(x0)
    hits = 0
    for i, z in seq:
        hits += is_crossing(x[i], z, theta)
        x[i] = z
    return hits


def drop_noops(x0: Sequence[int], seq: Sequence[Event]) -> list[Event]:
    """Remove events that leave the node's opinion unchanged (the trajectory is unaffected)."""
    x = list(x0)
    kept = []
    for i, z in seq:
        if x[i] != z:
            kept.append((i, z))
            x[i] = z
    return kept


def classify_endpoint(net: InfluenceNetwork, dom: OpinionDomain, x: Sequence[int]) -> str:
    if len(set(x)) == 1:
        return "theta-consensus" if x[0] == dom.theta else "false-consensus"
    if is_equilibrium(net, dom, x):
        return "non-consensus-equilibrium"
    return "not-equilibrium"


def _shift(x: Sequence[int], theta: int) -> list[int]:
    return [v - theta for v in x]


def _unshift(seq: Sequence[Event], theta: int) -> list[Event]:
    return [(i, z + theta) for i, z in seq]


def _pull_up(net: InfluenceNetwork, x: list[int], level: int, events: list[Event]) -> None:
    """Move nodes below ``level`` up to it, in cohesive-expansion order of ``{x >= level}``.

    A node below joins once it puts weight >= 1/2 on nodes at or above
    ``level``; lowest id first. Every such move is Pareto-improving when
    ``level`` does not exceed the truth.
    """
    while True:
        for i in range(net.n):
            if x[i] >= level:
                continue
            den, row = net.integer_rows[i]
            if 2 * sum(num for j, num in row if x[j] >= level) >= den:
                x[i] = level
                events.append((i, level))
                break
        else:
            return


def _sweep_below(net: InfluenceNetwork, x: list[int], lo: int, side: str) -> list[Event]:
    """Inward sweep on the negative side (truth at 0); no event crosses 0.

    Levels 0, -1, ... are visited in turn and the nodes below each level are
    pulled up to it. Levels whose strict sublevel set is empty or strictly
    cohesive admit no move, so only the pivots of the convergence argument
    (psi^0 > psi^1 > ...) produce events.
    """
    events: list[Event] = []
    k = 0
    for level in range(0, lo, -1):
        before = len(events)
        _pull_up(net, x, level, events)
        if len(events) > before:
            log.debug("%s^%d = %d: %d node(s) pulled", side, k, level, len(events) - before)
            k += 1
    return events


def _negate(seq: Sequence[Event]) -> list[Event]:
    return [(i, -z) for i, z in seq]


def construct_equilibrium_sequence(
    net: InfluenceNetwork, dom: OpinionDomain, x0: Sequence[int]
) -> list[Event]:
    """A legal, crossing-free sequence from ``x0`` that ends in an equilibrium.

    The side below the truth is swept inward first, then the mirrored sweep
    runs above it. Consensus inputs yield the empty sequence.
    """
    x0 = check_state(net, dom, x0)
    if len(set(x0)) == 1:
        return []
    sd = dom.shifted()
    x = _shift(x0, dom.theta)
    low = _sweep_below(net, x, sd.lo, "psi")
    neg = [-v for v in x]
    high = _negate(_sweep_below(net, neg, -sd.hi, "phi"))
    return _unshift(low + high, dom.theta)


def _require_truth_path(net, dom, x0, seq, *, crossing_free: bool) -> None:
    rep = verify_sequence_legal(net, dom, x0, seq)
    if not rep.legal:
        raise PreconditionError(f"input sequence is illegal at event {rep.first_violation}")
    if any(v != dom.theta for v in rep.final):
        raise PreconditionError(f"input sequence ends at {rep.final}, not consensus on theta={dom.theta}")
    if crossing_free and count_crossings(x0, seq, dom.theta):
        raise PreconditionError("input sequence contains crossing updates")


def remove_crossing_updates(
    net: InfluenceNetwork, dom: OpinionDomain, x0: Sequence[int], seq: Sequence[Event]
) -> list[Event]:
    """Rewrite a truth-consensus sequence so no update jumps across the truth.

    Same nodes in the same order; an event keeps its opinion when it stays on
    the node's current side of the truth and is redirected to the truth
    otherwise (including every later event of a node already at the truth).
    """
    x0 = check_state(net, dom, x0)
    _require_truth_path(net, dom, x0, seq, crossing_free=False)
    y = _shift(x0, dom.theta)
    out: list[Event] = []
    for i, z in seq:
        z = z - dom.theta
        new = z if y[i] * z > 0 else 0
        y[i] = new
        out.append((i, new))
    return _unshift(out, dom.theta)


def compress_to_pm1(
    net: InfluenceNetwork, dom: OpinionDomain, x0: Sequence[int], seq: Sequence[Event]
) -> list[Event]:
    """Rewrite a crossing-free truth-consensus sequence to stop one step short of the truth.

    Every event that targets the truth is redirected to truth - 1 or truth + 1,
    by the node's current side. Replaying the result leaves every node that
    started below the truth at truth - 1 and every node above at truth + 1.
    """
    x0 = check_state(net, dom, x0)
    _require_truth_path(net, dom, x0, seq, crossing_free=True)
    y = _shift(x0, dom.theta)
    out: list[Event] = []
    for i, z in seq:
        z = z - dom.theta
        if z == 0 and y[i] < 0:
            z = -1
        elif z == 0 and y[i] > 0:
            z = 1
        y[i] = z
        out.append((i, z))
    return _unshift(out, dom.theta)


def settle_pm1(net: InfluenceNetwork, dom: OpinionDomain, x: Sequence[int]) -> tuple[list[Event], str]:
    """From a state with every node at truth -/+ 1, reach a false consensus or a non-consensus equilibrium.

    Returns ``(events, case)``. ``case == "pinned"``: some non-empty strictly
    cohesive set sits entirely at truth - 1 and can never move, so any
    equilibrium keeps it there; an equilibrium sequence is returned.
    ``case == "expand"``: otherwise the cohesive expansion of the truth + 1
    nodes covers everyone, and its addition order moves each remaining node
    straight to truth + 1.
    """
    x = check_state(net, dom, x)
    y = _shift(x, dom.theta)
    if any(v not in (-1, 1) for v in y):
        raise PreconditionError("every node must sit one step from the truth")
    lower = [i for i, v in enumerate(y) if v == -1]
    pinned = cohesion.largest_strictly_cohesive_subset(net, lower)
    if pinned:
        log.debug("pinned block at truth-1: %s", pinned)
        return construct_equilibrium_sequence(net, dom, x), "pinned"
    upper = [i for i, v in enumerate(y) if v == 1]
    order = cohesion.expansion_order(net, upper)
    return [(i, dom.theta + 1) for i in order], "expand"


@dataclass
class FalseOutcome:
    sequence: list[Event]
    outcome: str
    endpoint: tuple[int, ...]
    pipeline: str


def construct_false_outcome_sequence(
    net: InfluenceNetwork, dom: OpinionDomain, x0: Sequence[int]
) -> FalseOutcome:
    """A legal sequence ending in a false consensus or a non-consensus equilibrium.

    Requires that no node starts at the truth. First tries the equilibrium
    sequence; if that happens to reach the truth, the sequence is rewritten
    crossing-free, compressed to truth -/+ 1 and finished by ``settle_pm1``.
    """
    x0 = check_state(net, dom, x0)
    if dom.theta in x0:
        raise PreconditionError(f"node {x0.index(dom.theta)} starts at the truth {dom.theta}")
    seq = construct_equilibrium_sequence(net, dom, x0)
    end = verify_sequence_legal(net, dom, x0, seq).final
    if any(v != dom.theta for v in end):
        return FalseOutcome(seq, classify_endpoint(net, dom, end), end, "equilibrium")
    seq = remove_crossing_updates(net, dom, x0, seq)
    seq = compress_to_pm1(net, dom, x0, seq)
    mid = verify_sequence_legal(net, dom, x0, seq).final
    tail, case = settle_pm1(net, dom, mid)
    seq = drop_noops(x0, seq + tail)
    end = verify_sequence_legal(net, dom, x0, seq).final
    return FalseOutcome(seq, classify_endpoint(net, dom, end), end, f"transforms/{case}")


class TruthPreconditionError(PreconditionError):
    def __init__(self, side: str, witness: tuple[int, ...]):
        self.side = side
        self.witness = witness
        super().__init__(f"nodes {side} the truth contain the strictly cohesive set {list(witness)}")


def construct_truth_consensus_sequence(
    net: InfluenceNetwork, dom: OpinionDomain, x0: Sequence[int]
) -> list[Event]:
    """A legal sequence reaching consensus on the truth.

    Requires that neither the nodes below nor the nodes above the truth
    contain a non-empty strictly cohesive set; otherwise raises
    ``TruthPreconditionError`` carrying a minimal such set. Nodes below move to
    the truth in cohesive-expansion order, then the nodes above.
    """
    x0 = check_state(net, dom, x0)
    for side, members in (
        ("below", [i for i, v in enumerate(x0) if v < dom.theta]),
        ("above", [i for i, v in enumerate(x0) if v > dom.theta]),
    ):
        witness = cohesion.minimal_strictly_cohesive_witness(net, members)
        if witness is not None:
            raise TruthPreconditionError(side, witness)
    x = _shift(x0, dom.theta)
    events: list[Event] = []
    _pull_up(net, x, 0, events)
    neg = [-v for v in x]
    up: list[Event] = []
    _pull_up(net, neg, 0, up)
    events += _negate(up)
    if any(v != 0 for v in neg):
        raise AssertionError("cohesive expansion failed to cover every node")
    return _unshift(events, dom.theta)


def find_sequence(
    net: InfluenceNetwork,
    dom: OpinionDomain,
    x0: Sequence[int],
    goal: Callable[[tuple[int, ...]], bool],
    require_crossing: bool = False,
    max_states: int = 200_000,
) -> list[Event] | None:
    """Shortest legal sequence from ``x0`` to a state satisfying ``goal`` (breadth-first).

    With ``require_crossing`` the path must contain at least one crossing
    update. Returns None when no such path exists within ``max_states``
    explored states.
    """
    start = (check_state(net, dom, x0), False)
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        x, crossed = state
        if goal(x) and (crossed or not require_crossing):
            path = []
            while parent[state] is not None:
                state, ev = parent[state]
                path.append(ev)
            return path[::-1]
        for i in range(net.n):
            for z in pareto_set(net, dom, x, i):
                if z == x[i]:
                    continue
                nxt = list(x)
                nxt[i] = z
                key = (tuple(nxt), crossed or is_crossing(x[i], z, dom.theta))
                if key not in parent:
                    if len(parent) >= max_states:
                        return None
                    parent[key] = (state, (i, z))
                    queue.append(key)
    return None
