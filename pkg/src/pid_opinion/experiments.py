"""Seeded Monte Carlo ensembles over network-generator parameters.

Each replicate draws a network, a truth and an initial state from its own
random stream, runs the dynamics to equilibrium and records steady-state
metrics. A sweep aggregates replicates per grid value with 95% confidence
intervals: normal approximation for real-valued metrics, Wilson score
intervals for the Bernoulli ones.

Replicate ``r`` uses the seed ``SeedSequence(master_seed, spawn_key=(r,))``
for every grid value, so grid points share initial conditions (common
random numbers) and results do not depend on the number of workers.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import graph
from .dynamics import OpinionDomain, simulate
from .fileio import csv_text, read_int_list

log = logging.getLogger(__name__)

FAMILIES = ("lattice", "erdos_renyi", "watts_strogatz")
METRICS = ("mean_abs_dist_to_truth", "consensus_on_truth", "consensus", "opinion_variance", "cluster_count")
BERNOULLI = {"consensus_on_truth", "consensus"}
Z95 = 1.959963984540054


@dataclass
class ExperimentConfig:
    family: str = "erdos_renyi"
    n: int = 100
    p: float = 0.08
    k: int = 4
    beta: float = 0.1
    rows: int = 10
    cols: int = 10
    grid: list[float] = field(default_factory=list)
    lo: int = 1
    hi: int = 30
    theta_policy: str = "uniform-random"
    theta: int | None = None
    x0_policy: str = "uniform-random"
    x0: list[int] | None = None
    x0_file: str | None = None
    replicates: int = 100
    master_seed: int = 0
    max_steps: int = 10**6
    check_every: int | None = None
    choice: str = "uniform"
    include_nonconverged: bool = True
    cluster_mode: str = "distinct"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.theta_policy not in ("fixed", "uniform-random"):
            raise ValueError(f"unknown theta_policy {self.theta_policy!r}")
        if self.theta_policy == "fixed" and self.theta is None:
            raise ValueError("theta_policy 'fixed' needs theta")
        if self.x0_policy not in ("uniform-random", "file", "seeded-list"):
            raise ValueError(f"unknown x0_policy {self.x0_policy!r}")
        if self.x0_policy == "seeded-list" and self.x0 is None:
            raise ValueError("x0_policy 'seeded-list' needs x0")
        if self.x0_policy == "file" and self.x0_file is None:
            raise ValueError("x0_policy 'file' needs x0_file")
        if self.cluster_mode not in ("distinct", "components"):
            raise ValueError(f"unknown cluster_mode {self.cluster_mode!r}")
        for v in [self.p, self.beta, *(self.grid if self.family != "lattice" else [])]:
            if not 0 <= v <= 1:
                raise ValueError(f"probability {v} outside [0, 1]")
        OpinionDomain(self.lo, self.hi, self.lo if self.theta is None else self.theta)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**data)

    @property
    def swept(self) -> str | None:
        return {"erdos_renyi": "p", "watts_strogatz": "beta"}.get(self.family)

    def at(self, value: float) -> ExperimentConfig:
        """Copy with the swept parameter set to ``value``."""
        if self.swept is None:
            return self
        return dataclasses.replace(self, **{self.swept: value})


def full_scale(cfg: ExperimentConfig) -> ExperimentConfig:
    """1000 replicates over the grid 0.01, 0.02, ..., 1.00."""
    warnings.warn("full-scale sweep: 100 grid points x 1000 replicates, expect a long run", stacklevel=2)
    return dataclasses.replace(cfg, replicates=1000, grid=[round(0.01 * k, 2) for k in range(1, 101)])


@dataclass
class RunRecord:
    replicate: int
    seed: int
    converged: bool
    steps: int
    theta: int
    mean_abs_dist_to_truth: float
    consensus: bool
    consensus_on_truth: bool
    opinion_variance: float
    cluster_count: int


def replicate_seed(master_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def build_network(cfg: ExperimentConfig, rng: np.random.Generator) -> graph.InfluenceNetwork:
    if cfg.n == 1 and cfg.family != "lattice":
        return graph.InfluenceNetwork(1, (((0, Fraction(1)),),))
    if cfg.family == "lattice":
        return graph.lattice(cfg.rows, cfg.cols)
    if cfg.family == "erdos_renyi":
        return graph.erdos_renyi(cfg.n, cfg.p, rng)
    return graph.watts_strogatz(cfg.n, cfg.k, cfg.beta, rng)


def cluster_count(x: Sequence[int], net: graph.InfluenceNetwork | None = None, mode: str = "distinct") -> int:
    """Distinct opinion values, or (``mode='components'``) same-opinion connected components."""
    if mode == "distinct":
        return len(set(x))
    if net is None:
        raise ValueError("components mode needs the network")
    parent = list(range(len(x)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j, _ in net.edges():
        if x[i] == x[j]:
            parent[find(i)] = find(j)
    return len({find(i) for i in range(len(x))})


def run_replicate(cfg: ExperimentConfig, index: int) -> RunRecord:
    if not 0 <= index < cfg.replicates:
        raise ValueError(f"replicate index {index} outside [0, {cfg.replicates})")
    seed = replicate_seed(cfg.master_seed, index)
    rng = np.random.default_rng(seed)
    net = build_network(cfg, rng)
    theta = cfg.theta if cfg.theta_policy == "fixed" else int(rng.integers(cfg.lo, cfg.hi + 1))
    dom = OpinionDomain(cfg.lo, cfg.hi, theta)
    if cfg.x0_policy == "uniform-random":
        x0 = rng.integers(cfg.lo, cfg.hi + 1, size=net.n).tolist()
    elif cfg.x0_policy == "seeded-list":
        x0 = list(cfg.x0)
    else:
        x0 = read_int_list(cfg.x0_file)
    res = simulate(net, dom, x0, rng, max_steps=cfg.max_steps, check_every=cfg.check_every, choice=cfg.choice)
    x = np.asarray(res.final, dtype=float)
    consensus = len(set(res.final)) == 1
    return RunRecord(
        replicate=index,
        seed=seed,
        converged=res.converged,
        steps=res.steps,
        theta=theta,
        mean_abs_dist_to_truth=float(np.mean(np.abs(x - theta))),
        consensus=consensus,
        consensus_on_truth=consensus and res.final[0] == theta,
        opinion_variance=0.0 if consensus else float(np.var(x)),
        cluster_count=cluster_count(res.final, net, cfg.cluster_mode),
    )


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def normal_interval(values: Sequence[float], z: float = Z95) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    m = float(v.mean())
    if len(v) < 2:
        return (m, m)
    half = z * float(v.std(ddof=1)) / math.sqrt(len(v))
    return (m - half, m + half)


@dataclass
class SweepSummary:
    param: float | None
    n_reps: int
    n_nonconverged: int
    mean: dict[str, float]
    ci: dict[str, tuple[float, float]]
    degenerate: bool = False
    records: list[RunRecord] = field(default_factory=list, repr=False)

    def half_width(self, metric: str) -> float:
        lo, hi = self.ci[metric]
        return (hi - lo) / 2


def summarize(param: float | None, records: list[RunRecord], include_nonconverged: bool = True) -> SweepSummary:
    used = records if include_nonconverged else [r for r in records if r.converged]
    mean, ci = {}, {}
    degenerate = len(used) < 2
    for m in METRICS:
        vals = [float(getattr(r, m)) for r in used]
        if not vals:
            mean[m], ci[m] = math.nan, (math.nan, math.nan)
            continue
        mean[m] = float(np.mean(vals))
        if degenerate:
            ci[m] = (mean[m], mean[m])
        elif m in BERNOULLI:
            ci[m] = wilson_interval(int(sum(vals)), len(vals))
        else:
            ci[m] = normal_interval(vals)
    nonconv = sum(not r.converged for r in records)
    if nonconv:
        log.warning("param=%s: %d of %d replicates hit max_steps", param, nonconv, len(records))
    return SweepSummary(param, len(records), nonconv, mean, ci, degenerate, records)


def default_jobs() -> int:
    return max(1, int(os.environ.get("PID_OPINION_JOBS", "1")))


def _run_indexed(args):
    return run_replicate(*args)


def run_replicates(cfg: ExperimentConfig, jobs: int | None = None) -> list[RunRecord]:
    jobs = default_jobs() if jobs is None else max(1, jobs)
    tasks = [(cfg, r) for r in range(cfg.replicates)]
    if jobs == 1:
        return [run_replicate(c, r) for c, r in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_indexed, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def sweep(cfg: ExperimentConfig, jobs: int | None = None) -> list[SweepSummary]:
    """One summary per grid value, in grid order (a single row when nothing is swept)."""
    grid = cfg.grid if cfg.swept and cfg.grid else [None]
    out = []
    for value in grid:
        sub = cfg if value is None else cfg.at(value)
        param = value if value is not None else (getattr(cfg, cfg.swept) if cfg.swept else None)
        records = run_replicates(sub, jobs)
        out.append(summarize(param, records, cfg.include_nonconverged))
        log.info("param=%s done: P(truth)=%.3f", param, out[-1].mean["consensus_on_truth"])
    return out


SUMMARY_HEADER = ("param", "metric", "mean", "ci_lo", "ci_hi", "n_reps", "n_nonconverged")
RAW_HEADER = ("param",) + tuple(f.name for f in dataclasses.fields(RunRecord))


def summary_csv(summaries: list[SweepSummary]) -> str:
    rows = []
    for s in summaries:
        for m in METRICS:
            lo, hi = s.ci[m]
            rows.append(("" if s.param is None else s.param, m, s.mean[m], lo, hi, s.n_reps, s.n_nonconverged))
    return csv_text(SUMMARY_HEADER, rows)


def raw_csv(summaries: list[SweepSummary]) -> str:
    rows = []
    for s in summaries:
        for r in s.records:
            rows.append(("" if s.param is None else s.param, *dataclasses.astuple(r)))
    return csv_text(RAW_HEADER, rows)
