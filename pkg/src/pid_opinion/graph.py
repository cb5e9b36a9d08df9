"""Row-stochastic influence networks with exact rational weights.

Node ids are 0-based. A network is immutable once built; every row sums to
exactly 1 and every stored weight is strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import NetworkFormatError

Row = tuple[tuple[int, Fraction], ...]


@dataclass(frozen=True)
class InfluenceNetwork:
    n: int
    rows: tuple[Row, ...]

    def __post_init__(self):
        if self.n < 1:
            raise NetworkFormatError("network needs at least one node")
        if len(self.rows) != self.n:
            raise NetworkFormatError(f"expected {self.n} rows, got {len(self.rows)}")
        for i, row in enumerate(self.rows):
            seen = set()
            total = Fraction(0)
            for j, w in row:
                if not 0 <= j < self.n:
                    raise NetworkFormatError(f"node id {j} out of range [0, {self.n})")
                if j in seen:
                    raise NetworkFormatError(f"duplicate edge {i} -> {j}")
                if w <= 0:
                    raise NetworkFormatError(f"weight {i} -> {j} must be positive, got {w}")
                seen.add(j)
                total += w
            if total != 1:
                raise NetworkFormatError(f"row {i} sums to {total}")

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[int, object] | Iterable[tuple[int, object]]]) -> InfluenceNetwork:
        """Build from per-node ``{target: weight}`` maps (or pair lists); weights go through ``Fraction``."""
        built = []
        for row in rows:
            items = row.items() if isinstance(row, Mapping) else row
            built.append(tuple(sorted((int(j), Fraction(w)) for j, w in items)))
        return cls(len(built), tuple(built))

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[object]]) -> InfluenceNetwork:
        rows = []
        for r in matrix:
            rows.append({j: w for j, w in enumerate(r) if Fraction(w) != 0})
        return cls.from_rows(rows)

    def weight(self, i: int, j: int) -> Fraction:
        return self._dense[i].get(j, Fraction(0))

    def out_neighbors(self, i: int) -> tuple[int, ...]:
        return tuple(j for j, _ in self.rows[i])

    def weight_into(self, i: int, members) -> Fraction:
        """Total weight node ``i`` places on ``members`` (any container of ids)."""
        return sum((w for j, w in self.rows[i] if j in members), Fraction(0))

    def to_matrix(self) -> list[list[Fraction]]:
        return [[self.weight(i, j) for j in range(self.n)] for i in range(self.n)]

    def edges(self) -> list[tuple[int, int, Fraction]]:
        return [(i, j, w) for i, row in enumerate(self.rows) for j, w in row]

    @cached_property
    def _dense(self) -> list[dict[int, Fraction]]:
        return [dict(row) for row in self.rows]

    @cached_property
    def integer_rows(self) -> tuple[tuple[int, tuple[tuple[int, int], ...]], ...]:
        """Per row: ``(den, ((j, num), ...))`` with ``w_ij == num / den`` exactly."""
        out = []
        for row in self.rows:
            den = math.lcm(*(w.denominator for _, w in row))
            out.append((den, tuple((j, w.numerator * (den // w.denominator)) for j, w in row)))
        return tuple(out)

    @cached_property
    def kernel_safe(self) -> bool:
        """True when the integer row form fits comfortably in int64 cost sums."""
        return max(den for den, _ in self.integer_rows) <= 2**40

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``(indptr, indices, nums, dens)`` int64 arrays of the integer row form."""
        if not self.kernel_safe:
            raise OverflowError("row denominators too large for the int64 kernel")
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indices, nums, dens = [], [], []
        for i, (den, row) in enumerate(self.integer_rows):
            indptr[i + 1] = indptr[i] + len(row)
            dens.append(den)
            for j, num in row:
                indices.append(j)
                nums.append(num)
        return (
            indptr,
            np.asarray(indices, dtype=np.int64),
            np.asarray(nums, dtype=np.int64),
            np.asarray(dens, dtype=np.int64),
        )

    def to_edge_list(self) -> str:
        lines = [f"n={self.n}"]
        for i, j, w in self.edges():
            lines.append(f"{i} {j} {w.numerator}/{w.denominator}")
        return "\n".join(lines) + "\n"


def from_edge_list(text: str) -> InfluenceNetwork:
    """Parse the edge-list format: ``n=<int>`` header, then ``src dst num/den`` lines.

    Blank lines and lines starting with ``#`` are ignored. Errors carry the
    offending line number.
    """
    n = None
    rows: list[dict[int, Fraction]] = []
    row_lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            if not line.startswith("n="):
                raise NetworkFormatError("expected header 'n=<int>'", lineno)
            try:
                n = int(line[2:])
            except ValueError:
                raise NetworkFormatError(f"bad node count {line[2:]!r}", lineno) from None
            if n < 1:
                raise NetworkFormatError("node count must be positive", lineno)
            rows = [{} for _ in range(n)]
            row_lines = [lineno] * n
            continue
        parts = line.split()
        if len(parts) != 3:
            raise NetworkFormatError(f"expected '<src> <dst> <num>/<den>', got {line!r}", lineno)
        try:
            src, dst = int(parts[0]), int(parts[1])
            w = Fraction(parts[2])
        except (ValueError, ZeroDivisionError):
            raise NetworkFormatError(f"cannot parse edge {line!r}", lineno) from None
        for v in (src, dst):
            if not 0 <= v < n:
                raise NetworkFormatError(f"node id {v} out of range [0, {n})", lineno)
        if w <= 0:
            raise NetworkFormatError(f"weight must be positive, got {w}", lineno)
        if dst in rows[src]:
            raise NetworkFormatError(f"duplicate edge {src} -> {dst}", lineno)
        rows[src][dst] = w
        row_lines[src] = lineno
    if n is None:
        raise NetworkFormatError("empty document, missing 'n=<int>' header")
    for i, row in enumerate(rows):
        total = sum(row.values(), Fraction(0))
        if total != 1:
            raise NetworkFormatError(f"row {i} sums to {total}", row_lines[i])
    return InfluenceNetwork.from_rows(rows)


def _uniform_rows(n: int, neighbors: Sequence[Iterable[int]]) -> InfluenceNetwork:
    rows = []
    for i in range(n):
        nb = sorted(set(neighbors[i]))
        if not nb:
            rows.append(((i, Fraction(1)),))
        else:
            w = Fraction(1, len(nb))
            rows.append(tuple((j, w) for j in nb))
    return InfluenceNetwork(n, tuple(rows))


def lattice(rows: int, cols: int) -> InfluenceNetwork:
    """Bounded (non-toroidal) grid; each node splits weight equally over its von Neumann neighbours.

    Node ``r * cols + c`` sits at row ``r``, column ``c``.
    """
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError(f"lattice needs rows*cols >= 2, got {rows}x{cols}")
    nbrs = []
    for r in range(rows):
        for c in range(cols):
            cand = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
            nbrs.append([rr * cols + cc for rr, cc in cand if 0 <= rr < rows and 0 <= cc < cols])
    return _uniform_rows(rows * cols, nbrs)


def erdos_renyi(n: int, p: float, rng: np.random.Generator) -> InfluenceNetwork:
    """Directed G(n, p) without self-loops; rows get weight 1/out-degree.

    A node that draws no out-links gets a self-loop of weight 1.
    """
    if n < 2:
        raise ValueError(f"erdos_renyi needs n >= 2, got {n}")
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    draws = rng.random((n, n)) < p
    np.fill_diagonal(draws, False)
    return _uniform_rows(n, [np.flatnonzero(draws[i]).tolist() for i in range(n)])


def watts_strogatz(n: int, k: int, beta: float, rng: np.random.Generator) -> InfluenceNetwork:
    """Undirected small-world graph (ring of degree k, per-edge rewiring prob. beta), made bidirectional."""
    import networkx as nx

    if k < 2 or k % 2 or not n > k:
        raise ValueError(f"watts_strogatz needs even k >= 2 and n > k, got n={n}, k={k}")
    if not 0 <= beta <= 1:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    g = nx.watts_strogatz_graph(n, k, beta, seed=int(rng.integers(2**63)))
    return _uniform_rows(n, [list(g.neighbors(i)) for i in range(n)])


def random_network(
    n: int,
    rng: np.random.Generator,
    *,
    max_out: int | None = None,
    max_units: int = 4,
    self_loops: bool = True,
) -> InfluenceNetwork:
    """Random row-stochastic network with small-denominator rational weights.

    Each row picks 1..``max_out`` targets and integer units in ``1..max_units``,
    then normalises; small denominators make exact-1/2 ties common.
    """
    max_out = n if max_out is None else min(max_out, n)
    rows = []
    for i in range(n):
        pool = np.arange(n) if self_loops else np.array([j for j in range(n) if j != i] or [i])
        m = int(rng.integers(1, min(max_out, len(pool)) + 1))
        targets = rng.choice(pool, size=m, replace=False)
        units = rng.integers(1, max_units + 1, size=m)
        total = int(units.sum())
        rows.append({int(j): Fraction(int(u), total) for j, u in zip(targets, units)})
    return InfluenceNetwork.from_rows(rows)


def _skeleton(net: InfluenceNetwork) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(net.n)]
    for i, j, _ in net.edges():
        if i != j:
            adj[i].add(j)
            adj[j].add(i)
    return adj


def clustering_coefficient(net: InfluenceNetwork) -> float:
    """Average local clustering of the undirected skeleton; degree < 2 nodes count as 0."""
    adj = _skeleton(net)
    total = 0.0
    for i in range(net.n):
        nb = sorted(adj[i])
        d = len(nb)
        if d < 2:
            continue
        links = sum(1 for a in range(d) for b in range(a + 1, d) if nb[b] in adj[nb[a]])
        total += 2.0 * links / (d * (d - 1))
    return total / net.n


def density(net: InfluenceNetwork) -> float:
    """Fraction of ordered pairs (i != j) carrying an edge."""
    if net.n < 2:
        return 0.0
    off = sum(1 for i, j, _ in net.edges() if i != j)
    return off / (net.n * (net.n - 1))


def mean_out_degree(net: InfluenceNetwork) -> float:
    return sum(1 for i, j, _ in net.edges() if i != j) / net.n
