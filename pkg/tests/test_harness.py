"""Experiment driver, strategy comparison, zero counting, table output."""
import io
import json
import math

import numpy as np
import pytest

import toposample as ts
from toposample.config import ExperimentConfig
from toposample.errors import ConfigError
from toposample.harness import (
    emit_table,
    experiment_table,
    format_value,
    profile_dump,
    write_csv,
    zero_count_table,
)
from toposample.planner import SamplingPlan
from toposample.topology import verify_match


def _config(model, **kw):
    kw.setdefault("threshold", ts.threshold_zero())
    return ExperimentConfig(model=model, **kw)


def test_run_experiment_requires_seed(cheb5):
    with pytest.raises(ConfigError):
        ts.run_experiment(_config(cheb5, m=4, trials=10))


def test_run_experiment_counts_consistent(cheb5):
    config = _config(cheb5, m=8, trials=300, seed=11, oracle_resolution=1024)
    result = ts.run_experiment(config)
    assert result.trials == 300
    assert result.valid == 300 - result.degenerate
    assert result.matches_both <= min(result.matches_pos, result.matches_neg)
    assert result.correctness == pytest.approx(result.matches_both / result.valid)
    want_se = math.sqrt(result.correctness * (1.0 - result.correctness) / result.valid)
    assert result.stderr == pytest.approx(want_se, rel=1e-12)
    # the guided plan at m = 8 performs at least as well as its bound here
    assert result.correctness >= result.plan.bound - 3.0 * result.stderr


def test_run_experiment_deterministic_across_workers(cheb5):
    config1 = _config(cheb5, m=6, trials=600, seed=3, oracle_resolution=1024, workers=1)
    config2 = _config(cheb5, m=6, trials=600, seed=3, oracle_resolution=1024, workers=2)
    one = ts.run_experiment(config1)
    two = ts.run_experiment(config2)
    assert (one.matches_pos, one.matches_neg, one.matches_both, one.degenerate) == (
        two.matches_pos,
        two.matches_neg,
        two.matches_both,
        two.degenerate,
    )


def test_run_experiment_trial_log(cheb5):
    config = _config(cheb5, m=4, trials=20, seed=5, oracle_resolution=512)
    result = ts.run_experiment(config, keep_log=True)
    assert result.trial_log is not None
    assert len(result.trial_log) == 20


def test_null_model_match_rate_is_arcsine_exact(sinusoid, thr):
    # one frequency: the path is a pure phase-shifted wave, the truth is
    # always two components against one, and a 3-point grid matches it
    # exactly when the middle point lands on the opposite sign. For the
    runs = 2000
    grid = np.array([0.0, 0.3, 1.0])
    plan = SamplingPlan(
        grid=grid,
        m=2,
        strategy="topology",
        total_weight=float("nan"),
        bound=float("nan"),
        bound_vacuous=True,
    )
    hits = 0
    valid = 0
    for trial in range(runs):
        path = ts.sample_path(sinusoid, seed=123, stream=trial)
        report = verify_match(path, thr, plan, resolution=512)
        if report.degenerate:
            continue
        valid += 1
        hits += bool(report.match)
    # phase uniformity makes the match probability exactly 0.6 for a
    # middle point at 0.3 of the period
    rate = hits / valid
    se = math.sqrt(0.6 * 0.4 / valid)
    assert abs(rate - 0.6) < 4.0 * se


def test_seeded_confidence_intervals_cover_pooled_rate(cheb5, thr):
    # 2-sigma intervals from independent seeds should cover the pooled
    # estimate most of the time; 17 of 20 leaves slack below the
    # binomial tail at 95% coverage
    per_seed = 250
    results = []
    for seed in range(20):
        config = _config(cheb5, m=8, trials=per_seed, seed=seed, oracle_resolution=1024)
        results.append(ts.run_experiment(config))
    pooled = sum(r.matches_both for r in results) / sum(r.valid for r in results)
    covered = sum(
        1
        for r in results
        if abs(r.correctness - pooled) <= 2.0 * max(r.stderr, 1e-9)
    )
    assert covered >= 17


def test_compare_strategies_rows(binom5, thr):
    rows = ts.compare_strategies(binom5, thr, m=7, trials=400, seed=21, oracle_resolution=1024)
    assert [name for name, _ in rows] == ["topology", "uniform", "density"]
    by_name = dict(rows)
    for name, result in rows:
        assert result.plan.strategy == name
        assert result.trials == 400
    # identical paths: degenerate counts agree across strategies
    degs = {r.degenerate for _, r in rows}
    assert len(degs) == 1
    # guided grids should not trail the uniform grid by much on this model
    topo, unif = by_name["topology"], by_name["uniform"]
    joint_se = math.hypot(topo.stderr, unif.stderr)
    assert topo.correctness >= unif.correctness - 4.0 * joint_se


def test_compare_strategies_periodic_grids_coincide(mode5, thr):
    # stationary density: the equal-mass grid IS the uniform grid
    rows = dict(ts.compare_strategies(mode5, thr, m=5, trials=50, seed=2, oracle_resolution=1024))
    assert rows["topology"].plan.grid == pytest.approx(
        rows["uniform"].plan.grid, abs=1e-9
    )


def test_zero_count_sinusoid_exact(sinusoid):
    result = ts.zero_count_experiment(sinusoid, trials=200, seed=17, oracle_resolution=512)
    assert result.valid == 200 - result.degenerate
    # a single-frequency path crosses zero exactly twice per period, and
    # the rate prediction integrates to exactly two as well
    assert result.mean_zeros == 2.0
    assert result.expected == pytest.approx(2.0, rel=1e-9)


def test_zero_count_matches_prediction(binom5):
    result = ts.zero_count_experiment(binom5, trials=2000, seed=29, oracle_resolution=2048)
    want = math.sqrt(5.0) * 2.0 * math.atan(3.0) / math.pi
    assert result.expected == pytest.approx(want, rel=1e-9)
    assert abs(result.mean_zeros - result.expected) <= 3.0 * result.stderr
    assert result.rel_gap == pytest.approx(
        (result.mean_zeros - result.expected) / result.expected, rel=1e-12
    )


def test_zero_count_deterministic_across_workers(binom5):
    one = ts.zero_count_experiment(binom5, trials=600, seed=4, oracle_resolution=1024, workers=1)
    two = ts.zero_count_experiment(binom5, trials=600, seed=4, oracle_resolution=1024, workers=2)
    assert one.mean_zeros == two.mean_zeros
    assert one.degenerate == two.degenerate


def test_profile_dump_columns(cheb5, thr):
    header, rows = profile_dump(cheb5, thr, 33)
    assert header == [
        "x",
        "density",
        "cuberoot_density",
        "threshold_factor",
        "zero_density",
        "norm_cuberoot_density",
        "norm_zero_density",
        "nondegenerate",
    ]
    assert len(rows) == 33
    xs = [row[0] for row in rows]
    assert xs == pytest.approx(np.linspace(-1.0, 1.0, 33), abs=1e-12)
    for row in rows:
        assert row[2] == pytest.approx(row[1] ** (1.0 / 3.0), rel=1e-12)


def test_format_value():
    assert format_value(True) == "1"
    assert format_value(False) == "0"
    assert format_value(3) == "3"
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(float("nan")) == "nan"
    assert format_value("topology") == "topology"


def test_write_csv_layout():
    buf = io.StringIO()
    write_csv(buf, ["a", "b"], [[1, 2.5], [True, float("nan")]])
    assert buf.getvalue() == "a,b\n1,2.5\n1,nan\n"


def test_emit_table_json_structure(tmp_path):
    out = tmp_path / "table.json"
    emit_table(
        ["x", "y"],
        [[1.0, float("nan")]],
        str(out),
        "json",
        meta={"command": "demo"},
    )
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert set(doc) == {"version", "meta", "columns", "rows"}
    assert doc["columns"] == ["x", "y"]
    assert doc["rows"] == [[1.0, None]]
    assert doc["meta"]["command"] == "demo"


def test_experiment_and_zero_tables(cheb5, binom5):
    config = _config(cheb5, m=4, trials=30, seed=1, oracle_resolution=512)
    result = ts.run_experiment(config)
    header, rows = experiment_table(result)
    assert len(rows) == 1 and len(rows[0]) == len(header)
    zc = ts.zero_count_experiment(binom5, trials=30, seed=1, oracle_resolution=512)
    zheader, zrows = zero_count_table(zc)
    assert len(zrows) == 1 and len(zrows[0]) == len(zheader)
