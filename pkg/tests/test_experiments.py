import dataclasses
import math

import numpy as np
import pytest

from pid_opinion import experiments
from pid_opinion.experiments import ExperimentConfig, cluster_count, run_replicate, summarize, sweep
from pid_opinion.graph import InfluenceNetwork

SMALL = dict(family="erdos_renyi", n=20, p=0.2, lo=1, hi=10, replicates=8, master_seed=11)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(family="scale_free")
    with pytest.raises(ValueError):
        ExperimentConfig(replicates=0)
    with pytest.raises(ValueError):
        ExperimentConfig(grid=[0.1, 1.5])
    with pytest.raises(ValueError):
        ExperimentConfig(theta_policy="fixed")
    with pytest.raises(ValueError):
        ExperimentConfig(x0_policy="seeded-list")
    with pytest.raises(ValueError, match="unknown config field"):
        ExperimentConfig.from_dict({"famly": "lattice"})
    cfg = ExperimentConfig.from_dict({f.name: getattr(ExperimentConfig(), f.name) for f in dataclasses.fields(ExperimentConfig)})
    assert cfg == ExperimentConfig()


def test_cluster_count_examples():
    assert cluster_count((3, 3, 3)) == 1
    assert cluster_count((-1, -1, 1, 2)) == 3
    assert cluster_count((5, 5, 7, 7, 7)) == 2
    path = InfluenceNetwork.from_rows([{1: 1}, {2: 1}, {3: 1}, {2: 1}])
    assert cluster_count((5, 7, 5, 5), path, mode="components") == 3
    assert cluster_count((5, 5, 5, 5), path, mode="components") == 1


def test_single_node_converges_immediately():
    rec = run_replicate(ExperimentConfig(n=1, replicates=1), 0)
    assert rec.converged and rec.steps == 0 and rec.cluster_count == 1 and rec.opinion_variance == 0


def test_isolated_nodes_keep_their_opinions():
    cfg = ExperimentConfig(n=12, p=0.0, theta_policy="fixed", theta=5, lo=1, hi=10, replicates=3)
    rec = run_replicate(cfg, 2)
    rng = np.random.default_rng(rec.seed)
    rng.random((12, 12))  # the network draw
    x0 = rng.integers(1, 11, size=12)
    assert rec.converged and rec.steps == 0
    assert rec.mean_abs_dist_to_truth == pytest.approx(np.mean(np.abs(x0 - 5)))


def test_replicate_is_deterministic():
    cfg = ExperimentConfig(**SMALL)
    assert run_replicate(cfg, 3) == run_replicate(cfg, 3)
    assert run_replicate(cfg, 3).seed != run_replicate(cfg, 4).seed
    with pytest.raises(ValueError):
        run_replicate(cfg, 8)


def test_metric_consistency():
    cfg = ExperimentConfig(**{**SMALL, "replicates": 30, "grid": [0.05, 0.3]})
    for s in sweep(cfg):
        for r in s.records:
            if r.consensus_on_truth:
                assert r.consensus
            assert r.consensus == (r.cluster_count == 1) == (r.opinion_variance == 0)


def test_seeded_list_and_file_policies(tmp_path):
    x0 = [1, 2, 3, 4, 5, 6]
    cfg = ExperimentConfig(family="lattice", rows=2, cols=3, lo=1, hi=6, x0_policy="seeded-list", x0=x0, replicates=2)
    a = run_replicate(cfg, 0)
    path = tmp_path / "x0.txt"
    path.write_text("1, 2, 3, 4, 5, 6\n")
    b = run_replicate(dataclasses.replace(cfg, x0_policy="file", x0_file=str(path), x0=None), 0)
    assert a == b


def test_sweep_rows_and_parallel_determinism():
    cfg = ExperimentConfig(**{**SMALL, "grid": [0.1, 0.3, 0.6]})
    serial = sweep(cfg, jobs=1)
    assert [s.param for s in serial] == [0.1, 0.3, 0.6]
    assert all(s.n_reps == 8 for s in serial)
    parallel = sweep(cfg, jobs=3)
    assert experiments.summary_csv(serial) == experiments.summary_csv(parallel)
    assert experiments.raw_csv(serial) == experiments.raw_csv(parallel)


def test_env_jobs(monkeypatch):
    monkeypatch.setenv("PID_OPINION_JOBS", "3")
    assert experiments.default_jobs() == 3
    monkeypatch.delenv("PID_OPINION_JOBS")
    assert experiments.default_jobs() == 1


def test_single_replicate_is_flagged_degenerate():
    (s,) = sweep(ExperimentConfig(**{**SMALL, "replicates": 1}))
    assert s.degenerate
    assert all(s.half_width(m) == 0 for m in experiments.METRICS)


def test_intervals():
    lo, hi = experiments.wilson_interval(0, 20)
    assert lo == 0 and 0 < hi < 0.2
    lo, hi = experiments.wilson_interval(20, 20)
    assert hi == 1 and lo > 0.8
    # normal interval: mean +/- 1.96 SE
    vals = [1.0, 2.0, 3.0, 4.0]
    lo, hi = experiments.normal_interval(vals)
    half = experiments.Z95 * np.std(vals, ddof=1) / 2
    assert (lo, hi) == pytest.approx((2.5 - half, 2.5 + half))


def test_nonconverged_replicates_are_counted():
    cfg = ExperimentConfig(**{**SMALL, "max_steps": 1, "check_every": 1})
    (s,) = sweep(cfg)
    assert s.n_nonconverged > 0
    kept = summarize(s.param, s.records, include_nonconverged=False)
    assert kept.n_nonconverged == s.n_nonconverged and kept.n_reps == s.n_reps
    if kept.n_nonconverged == kept.n_reps:
        assert math.isnan(kept.mean["consensus"])


def test_summary_csv_layout():
    (s,) = sweep(ExperimentConfig(**SMALL))
    lines = experiments.summary_csv([s]).splitlines()
    assert lines[0] == "param,metric,mean,ci_lo,ci_hi,n_reps,n_nonconverged"
    assert len(lines) == 1 + len(experiments.METRICS)
    assert all(s.ci[m][0] <= s.mean[m] <= s.ci[m][1] for m in experiments.METRICS)


def test_full_scale_warns():
    with pytest.warns(UserWarning, match="full-scale"):
        cfg = experiments.full_scale(ExperimentConfig())
    assert cfg.replicates == 1000 and len(cfg.grid) == 100 and cfg.grid[-1] == 1.0


def test_convergence_rate_in_operating_regime():
    cfg = ExperimentConfig(family="erdos_renyi", n=100, lo=1, hi=30, grid=[0.05, 0.2], replicates=100, master_seed=7)
    for s in sweep(cfg):
        assert s.n_nonconverged <= 1
