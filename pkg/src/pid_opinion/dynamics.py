"""Pareto-improvement-driven opinion dynamics.

Each activated node picks a new opinion from its Pareto-improvement set: the
opinions that raise neither its social cost (weighted distance to its
out-neighbours) nor its cognitive cost (distance to the truth ``theta``).
Both inequalities are non-strict, so the current opinion always qualifies.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import cohesion
from .graph import InfluenceNetwork

CHOICE_MODES = ("uniform", "uniform-excluding-current")
BLOCK = 4096


@dataclass(frozen=True)
class OpinionDomain:
    """Contiguous integer opinions ``lo..hi`` with the truth ``theta`` among them."""

    lo: int
    hi: int
    theta: int

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty opinion range [{self.lo}, {self.hi}]")
        if not self.lo <= self.theta <= self.hi:
            raise ValueError(f"theta={self.theta} outside [{self.lo}, {self.hi}]")

    def __contains__(self, z) -> bool:
        return self.lo <= z <= self.hi

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def opinions(self) -> range:
        return range(self.lo, self.hi + 1)

    def shifted(self) -> OpinionDomain:
        """Same domain translated so the truth sits at 0."""
        return OpinionDomain(self.lo - self.theta, self.hi - self.theta, 0)


@dataclass(frozen=True)
class ParetoSet:
    """Integer interval ``[lo, hi]`` of admissible opinions."""

    lo: int
    hi: int

    def __contains__(self, z) -> bool:
        return self.lo <= z <= self.hi

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.lo, self.hi + 1))

    def __len__(self) -> int:
        return self.hi - self.lo + 1


def check_state(net: InfluenceNetwork, dom: OpinionDomain, x: Sequence[int]) -> tuple[int, ...]:
    x = tuple(int(v) for v in x)
    if len(x) != net.n:
        raise ValueError(f"state has {len(x)} entries, network has {net.n} nodes")
    for i, v in enumerate(x):
        if v not in dom:
            raise ValueError(f"x[{i}]={v} outside [{dom.lo}, {dom.hi}]")
    return x


def social_cost(net: InfluenceNetwork, x: Sequence[int], i: int, z: int, dom: OpinionDomain | None = None) -> Fraction:
    if dom is not None and z not in dom:
        raise ValueError(f"opinion {z} outside [{dom.lo}, {dom.hi}]")
    return sum((w * abs(z - x[j]) for j, w in net.rows[i]), Fraction(0))


def cognitive_cost(dom: OpinionDomain, z: int) -> int:
    if z not in dom:
        raise ValueError(f"opinion {z} outside [{dom.lo}, {dom.hi}]")
    return abs(z - dom.theta)


def _scaled_cost(net: InfluenceNetwork, x: Sequence[int], i: int, z: int) -> int:
    return sum(num * abs(z - x[j]) for j, num in net.integer_rows[i][1])


def pareto_set(net: InfluenceNetwork, dom: OpinionDomain, x: Sequence[int], i: int) -> ParetoSet:
    """Pareto-improvement set of node ``i``, found by testing every opinion in the domain."""
    base_social = _scaled_cost(net, x, i, x[i])
    base_cog = abs(x[i] - dom.theta)
    feasible = [
        z for z in dom.opinions()
        if abs(z - dom.theta) <= base_cog and _scaled_cost(net, x, i, z) <= base_social
    ]
    if feasible[-1] - feasible[0] + 1 != len(feasible):
        raise AssertionError(f"Pareto set {feasible} is not an interval")
    return ParetoSet(feasible[0], feasible[-1])


def is_legal_update(net: InfluenceNetwork, dom: OpinionDomain, x: Sequence[int], i: int, z: int) -> bool:
    return z in dom and z in pareto_set(net, dom, x, i)


def _choose(p: ParetoSet, current: int, u: float, choice: str) -> int:
    if choice == "uniform-excluding-current" and len(p) > 1:
        z = p.lo + int(u * (len(p) - 1))
        return z + 1 if z >= current else z
    return p.lo + int(u * len(p))


def step(
    net: InfluenceNetwork,
    dom: OpinionDomain,
    x: Sequence[int],
    rng: np.random.Generator,
    choice: str = "uniform",
) -> tuple[tuple[int, ...], tuple[int, int]]:
    """One activation: uniform node, then an opinion drawn from its Pareto set.

    Returns the new state and the event ``(i, z)``; ``z`` may equal ``x[i]``.
    """
    if choice not in CHOICE_MODES:
        raise ValueError(f"unknown choice mode {choice!r}")
    i = int(rng.integers(net.n))
    u = float(rng.random())
    z = _choose(pareto_set(net, dom, x, i), x[i], u, choice)
    new = list(x)
    new[i] = z
    return tuple(new), (i, z)


def is_equilibrium(net: InfluenceNetwork, dom: OpinionDomain, x: Sequence[int]) -> bool:
    """Every node's Pareto set is the singleton of its current opinion."""
    return all(len(pareto_set(net, dom, x, i)) == 1 for i in range(net.n))


def level_set(x: Sequence[int], z: int, mode: str) -> tuple[int, ...]:
    """Nodes whose opinion relates to ``z`` by ``mode`` (one of ``<= < >= > ==``)."""
    ops = {
        "<=": lambda v: v <= z,
        "<": lambda v: v < z,
        ">=": lambda v: v >= z,
        ">": lambda v: v > z,
        "==": lambda v: v == z,
        "=": lambda v: v == z,
    }
    if mode not in ops:
        raise ValueError(f"unknown relation {mode!r}")
    keep = ops[mode]
    return tuple(i for i, v in enumerate(x) if keep(v))


sublevel_set = level_set


def is_consensus(x: Sequence[int]) -> bool:
    return len(set(x)) <= 1


def is_equilibrium_thm1(net: InfluenceNetwork, dom: OpinionDomain, x: Sequence[int]) -> bool:
    """Graph-theoretic equilibrium test.

    Consensus, or: every sublevel set ``{x <= z}`` with ``z < theta`` and every
    superlevel set ``{x >= z}`` with ``z > theta`` is strictly cohesive.
    """
    if is_consensus(x):
        return True
    for z in range(dom.lo, dom.theta):
        if not cohesion.is_strictly_cohesive(net, level_set(x, z, "<=")):
            return False
    for z in range(dom.theta + 1, dom.hi + 1):
        if not cohesion.is_strictly_cohesive(net, level_set(x, z, ">=")):
            return False
    return True


@dataclass
class SimulationResult:
    final: tuple[int, ...]
    steps: int
    converged: bool
    events: list[tuple[int, int, int]] | None = None
    """``(t, node, new_opinion)`` with t counted from 1, when recorded."""


def _run_block_py(x, nodes, us, t, max_steps, check_every, skip_first_check, net, dom, exclude_current, ev_node, ev_val):
    """Pure-Python twin of ``_kernel.run_block`` (same draws, same order)."""
    k = 0
    first = True
    choice = "uniform-excluding-current" if exclude_current else "uniform"
    while True:
        due = t % check_every == 0 or t >= max_steps
        if due and not (first and skip_first_check):
            if is_equilibrium(net, dom, x):
                return t, 1, k
        first = False
        if t >= max_steps:
            return t, 2, k
        if k >= len(nodes):
            return t, 0, k
        i = int(nodes[k])
        z = _choose(pareto_set(net, dom, x, i), x[i], float(us[k]), choice)
        x[i] = z
        ev_node[k] = i
        ev_val[k] = z
        k += 1
        t += 1


def simulate(
    net: InfluenceNetwork,
    dom: OpinionDomain,
    x0: Sequence[int],
    rng: np.random.Generator,
    max_steps: int = 10**6,
    check_every: int | None = None,
    choice: str = "uniform",
    record_events: bool = False,
    engine: str = "auto",
) -> SimulationResult:
    """Run the dynamics until an equilibrium is detected or ``max_steps`` activations.

    The equilibrium test runs at step 0 and then every ``check_every`` steps
    (default n). Randomness is drawn in blocks of ``BLOCK`` node indices
    followed by ``BLOCK`` uniforms, so a given seed yields the same run on
    either engine.
    """
    if choice not in CHOICE_MODES:
        raise ValueError(f"unknown choice mode {choice!r}")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    x0 = check_state(net, dom, x0)
    check_every = net.n if check_every is None else int(check_every)
    if check_every < 1:
        raise ValueError("check_every must be >= 1")
    exclude = choice == "uniform-excluding-current"
    if engine == "auto":
        fits = net.kernel_safe and max(abs(dom.lo), abs(dom.hi)) * 2 * max(d for d, _ in net.integer_rows) < 2**62
        engine = "numba" if fits else "python"
    if engine == "numba":
        from . import _kernel

        indptr, indices, nums, _ = net.csr
        x = np.asarray(x0, dtype=np.int64)

        def run(nodes, us, t, skip, ev_node, ev_val):
            return _kernel.run_block(
                x, nodes, us, t, max_steps, check_every, skip,
                indptr, indices, nums, dom.lo, dom.hi, dom.theta, exclude, ev_node, ev_val,
            )
    elif engine == "python":
        x = list(x0)

        def run(nodes, us, t, skip, ev_node, ev_val):
            return _run_block_py(x, nodes, us, t, max_steps, check_every, skip, net, dom, exclude, ev_node, ev_val)
    else:
        raise ValueError(f"unknown engine {engine!r}")

    events: list[tuple[int, int, int]] | None = [] if record_events else None
    t, skip = 0, False
    while True:
        nodes = rng.integers(0, net.n, size=BLOCK, dtype=np.int64)
        us = rng.random(BLOCK)
        ev_node = np.zeros(BLOCK, dtype=np.int64)
        ev_val = np.zeros(BLOCK, dtype=np.int64)
        t_start = t
        t, status, used = run(nodes, us, t, skip, ev_node, ev_val)
        t, status, used = int(t), int(status), int(used)
        if events is not None:
            events.extend((t_start + k + 1, int(ev_node[k]), int(ev_val[k])) for k in range(used))
        if status:
            return SimulationResult(tuple(int(v) for v in x), t, status == 1, events)
        skip = True
