"""Experiment drivers, deterministic parallelism, and result output.

Correctness experiments draw many independent paths, compare grid
component counts against the dense-scan reference for each, and
aggregate match frequencies. Reproducibility rules:

* trial t of a run with seed s uses the coefficient stream (s, t), so
  results do not depend on how trials are split across workers;
* work is chunked in fixed blocks and reduced in chunk order, making
  output files byte-identical for every worker count;
* CSV output uses comma separators, '.' decimals, 17 significant
  digits, a header row, and LF line endings; JSON mirrors the same
  numbers plus the resolved configuration.
"""
from __future__ import annotations

import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .density import density_profile
from .errors import ConfigError
from .fields import FieldModel, ThresholdFn, sample_path, threshold_zero
from .planner import (
    SamplingPlan,
    build_plan,
    cumulative_weight,
    expected_zero_count,
    sampling_density_fn,
)
from .topology import cubical_beta0, default_oracle_resolution, oracle_beta0

_TRIAL_CHUNK = 512


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregated outcome of a correctness experiment."""

    plan: SamplingPlan
    trials: int
    valid: int
    matches_pos: int
    matches_neg: int
    matches_both: int
    degenerate: int
    correctness: float
    stderr: float
    seed: int
    trial_log: list | None = None


def _match_chunk(args):
    (model, threshold, grid, resolution, seed, start, stop, keep_log) = args
    a, b = model.domain
    pos = neg = both = degenerate = 0
    log = [] if keep_log else None
    for trial in range(start, stop):
        path = sample_path(model, seed, stream=trial)
        oracle = oracle_beta0(path, threshold, a, b, resolution)
        values = path.value(grid) - threshold.value(grid)
        grid_pos, grid_neg = cubical_beta0(values)
        if oracle.degenerate:
            degenerate += 1
        else:
            mp = grid_pos == oracle.beta0_pos
            mn = grid_neg == oracle.beta0_neg
            pos += mp
            neg += mn
            both += mp and mn
        if keep_log:
            log.append(
                (
                    trial,
                    oracle.beta0_pos,
                    oracle.beta0_neg,
                    grid_pos,
                    grid_neg,
                    oracle.degenerate,
                )
            )
    return start, (pos, neg, both, degenerate), log


def _run_chunked(worker, args_list, workers):
    """Evaluate chunk tasks and reduce in chunk order regardless of pool."""
    if workers <= 1 or len(args_list) <= 1:
        results = [worker(a) for a in args_list]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, args_list, chunksize=1))
    return sorted(results, key=lambda r: r[0])


def run_experiment(config: ExperimentConfig, keep_log: bool = False) -> ExperimentResult:
    """Run a correctness experiment described by ``config``.

    Requires a seed. Degenerate trials (suspected double roots) are
    excluded from the match statistics but counted in the result.
    """
    if config.seed is None:
        raise ConfigError("a seed is required for experiments")
    plan = build_plan(
        config.model, config.threshold, config.strategy, m=config.m, p=config.p
    )
    resolution = config.oracle_resolution
    if resolution is None:
        resolution = default_oracle_resolution(config.model)
    tasks = [
        (
            config.model,
            config.threshold,
            plan.grid,
            resolution,
            config.seed,
            start,
            min(start + _TRIAL_CHUNK, config.trials),
            keep_log,
        )
        for start in range(0, config.trials, _TRIAL_CHUNK)
    ]
    pos = neg = both = degenerate = 0
    log = [] if keep_log else None
    for _, counts, chunk_log in _run_chunked(_match_chunk, tasks, config.workers):
        pos += counts[0]
        neg += counts[1]
        both += counts[2]
        degenerate += counts[3]
        if keep_log:
            log.extend(chunk_log)
    valid = config.trials - degenerate
    correctness = both / valid if valid else float("nan")
    stderr = (
        math.sqrt(correctness * (1.0 - correctness) / valid) if valid else float("nan")
    )
    return ExperimentResult(
        plan=plan,
        trials=config.trials,
        valid=valid,
        matches_pos=pos,
        matches_neg=neg,
        matches_both=both,
        degenerate=degenerate,
        correctness=correctness,
        stderr=stderr,
        seed=config.seed,
        trial_log=log,
    )


def compare_strategies(
    model: FieldModel,
    threshold: ThresholdFn,
    m: int,
    trials: int,
    seed: int,
    oracle_resolution: int | None = None,
    workers: int = 1,
) -> list[tuple[str, ExperimentResult]]:
    """Run all strategies at equal cell count on identical paths."""
    out = []
    for strategy in ("topology", "uniform", "density"):
        config = ExperimentConfig(
            model=model,
            threshold=threshold,
            strategy=strategy,
            m=m,
            trials=trials,
            seed=seed,
            oracle_resolution=oracle_resolution,
            workers=workers,
        )
        out.append((strategy, run_experiment(config)))
    return out


@dataclass(frozen=True)
class ZeroCountResult:
    """Mean observed zero count against the first-moment prediction."""

    trials: int
    valid: int
    degenerate: int
    mean_zeros: float
    stderr: float
    expected: float
    rel_gap: float
    seed: int


def _zero_chunk(args):
    (model, resolution, seed, start, stop) = args
    a, b = model.domain
    threshold = threshold_zero()
    n = total = total_sq = degenerate = 0
    for trial in range(start, stop):
        path = sample_path(model, seed, stream=trial)
        oracle = oracle_beta0(path, threshold, a, b, resolution)
        if oracle.degenerate:
            degenerate += 1
            continue
        count = int(oracle.zeros.size)
        n += 1
        total += count
        total_sq += count * count
    return start, (n, total, total_sq, degenerate)


def zero_count_experiment(
    model: FieldModel,
    trials: int,
    seed: int,
    oracle_resolution: int | None = None,
    workers: int = 1,
) -> ZeroCountResult:
    """Compare the Monte Carlo mean zero count with its exact integral."""
    resolution = oracle_resolution
    if resolution is None:
        resolution = default_oracle_resolution(model)
    expected = expected_zero_count(model)
    tasks = [
        (model, resolution, seed, start, min(start + _TRIAL_CHUNK, trials))
        for start in range(0, trials, _TRIAL_CHUNK)
    ]
    n = total = total_sq = degenerate = 0
    for _, counts in _run_chunked(_zero_chunk, tasks, workers):
        n += counts[0]
        total += counts[1]
        total_sq += counts[2]
        degenerate += counts[3]
    mean = total / n if n else float("nan")
    var = (total_sq / n - mean * mean) if n else float("nan")
    stderr = math.sqrt(max(var, 0.0) / n) if n else float("nan")
    return ZeroCountResult(
        trials=trials,
        valid=n,
        degenerate=degenerate,
        mean_zeros=mean,
        stderr=stderr,
        expected=expected,
        rel_gap=abs(mean - expected) / expected if expected else float("nan"),
        seed=seed,
    )


def profile_dump(
    model: FieldModel, threshold: ThresholdFn, grid_size: int
) -> tuple[list[str], list[list]]:
    """Density profile table for plotting: header and rows.

    Normalized columns divide the cube-rooted sampling density and the
    zero density by their integrals, so matching shapes plot on top of
    each other. Degenerate points carry NaN densities and a 0 flag.
    """
    if grid_size < 2:
        raise ValueError("profile needs at least two points")
    xs = np.linspace(model.a, model.b, grid_size)
    prof = density_profile(model, threshold, xs)
    try:
        total, _ = cumulative_weight(
            sampling_density_fn(model, threshold), model.a, model.b
        )
    except Exception:
        total = float("nan")
    try:
        zero_total = expected_zero_count(model)
    except Exception:
        zero_total = float("nan")
    cuberoot = np.cbrt(prof.density)
    norm_c = cuberoot / total if total and math.isfinite(total) else np.full_like(xs, np.nan)
    norm_d = (
        prof.zero_density / zero_total
        if zero_total and math.isfinite(zero_total)
        else np.full_like(xs, np.nan)
    )
    header = [
        "x",
        "density",
        "cuberoot_density",
        "threshold_factor",
        "zero_density",
        "norm_cuberoot_density",
        "norm_zero_density",
        "nondegenerate",
    ]
    rows = [
        [
            xs[i],
            prof.density[i],
            cuberoot[i],
            prof.threshold_factor[i],
            prof.zero_density[i],
            norm_c[i],
            norm_d[i],
            int(prof.nondegenerate[i]),
        ]
        for i in range(xs.size)
    ]
    return header, rows


def format_value(v) -> str:
    """CSV cell: 17 significant digits for floats, plain text otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(stream, header: list[str], rows: list[list]):
    stream.write(",".join(header) + "\n")
    for row in rows:
        stream.write(",".join(format_value(v) for v in row) + "\n")


def emit_table(header, rows, output, fmt, meta=None):
    """Write a result table as CSV or JSON to a path or stdout."""
    if fmt == "json":
        payload = {
            "version": __version__,
            "meta": meta or {},
            "columns": header,
            "rows": [
                [None if _is_nan(v) else _json_value(v) for v in row] for row in rows
            ],
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        write_csv(buf, header, rows)
        text = buf.getvalue()
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _is_nan(v):
    return isinstance(v, (float, np.floating)) and math.isnan(float(v))


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def experiment_table(result: ExperimentResult) -> tuple[list[str], list[list]]:
    header = [
        "strategy",
        "m",
        "total_weight",
        "bound",
        "bound_vacuous",
        "trials",
        "valid",
        "matches_pos",
        "matches_neg",
        "matches_both",
        "degenerate",
        "correctness",
        "stderr",
        "seed",
    ]
    plan = result.plan
    row = [
        plan.strategy,
        plan.m,
        plan.total_weight,
        plan.bound,
        plan.bound_vacuous,
        result.trials,
        result.valid,
        result.matches_pos,
        result.matches_neg,
        result.matches_both,
        result.degenerate,
        result.correctness,
        result.stderr,
        result.seed,
    ]
    return header, [row]


def zero_count_table(result: ZeroCountResult) -> tuple[list[str], list[list]]:
    header = [
        "trials",
        "valid",
        "degenerate",
        "mean_zeros",
        "stderr",
        "expected_zeros",
        "rel_gap",
        "seed",
    ]
    row = [
        result.trials,
        result.valid,
        result.degenerate,
        result.mean_zeros,
        result.stderr,
        result.expected,
        result.rel_gap,
        result.seed,
    ]
    return header, [row]
