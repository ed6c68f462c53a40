# app/core/experiment.py

"""
Single runs and multi-seed sweeps.

`run_sweep` expands a SweepSpec into (variant, point, seed) jobs, runs them
in-process or on a process pool, and assembles rows in job order so the
table never depends on completion order. Aggregates report the mean, the
sample standard deviation and their ratio per metric and point.
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional

import pandas as pd
from pydantic import ValidationError
from scipy.stats import binomtest

from app.config import get_settings
from app.core.engine import Simulator
from app.models.metrics import METRIC_COLUMNS, RunMetrics
from app.models.scenario import ScenarioConfig, SweepPoint, SweepSpec
from app.storage import ensure_dir, trace_file_name, write_trace_jsonl

logger = logging.getLogger(__name__)

settings = get_settings()

AGGREGATE_KINDS = ("mean", "std", "cv")


# ============================================
# Single scenario
# ============================================

def run_scenario(cfg: ScenarioConfig) -> RunMetrics:
    """Run one simulation to completion."""
    return Simulator(cfg).run()


def run_scenario_traced(cfg: ScenarioConfig) -> tuple[RunMetrics, list[dict[str, Any]]]:
    """Run one simulation and keep the per-transmission trace."""
    sim = Simulator(cfg, trace=True)
    metrics = sim.run()
    return metrics, sim.trace or []


# ============================================
# Sweep jobs
# ============================================

def _empty_metrics() -> dict[str, float]:
    return {column: math.nan for column in METRIC_COLUMNS}


Job = tuple[SweepPoint, int, Optional[ScenarioConfig], str, Optional[str]]


def _run_job(job: Job) -> dict[str, Any]:
    point, seed, cfg, config_error, trace_path = job
    row: dict[str, Any] = {"variant": point.variant, **point.params, "seed": seed}

    if cfg is None:
        row.update(_empty_metrics())
        row["error"] = config_error
        return row

    try:
        if trace_path:
            metrics, trace = run_scenario_traced(cfg)
            write_trace_jsonl(trace, trace_path)
        else:
            metrics = run_scenario(cfg)
    except Exception as exc:  # recorded in the row
        logger.exception("run failed: variant=%s params=%s seed=%d", point.variant, point.params, seed)
        row.update(_empty_metrics())
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    row.update(metrics.flat_row())
    row["error"] = ""
    return row


def _build_jobs(spec: SweepSpec, trace_dir: Optional[Path] = None) -> list[Job]:
    jobs: list[Job] = []
    for point in spec.points():
        for seed in spec.seeds:
            trace_path = str(trace_dir / trace_file_name(point.variant, point.params, seed)) if trace_dir else None
            try:
                jobs.append((point, seed, spec.config_for(point, seed), "", trace_path))
            except ValidationError as exc:
                jobs.append((point, seed, None, f"ValidationError: {exc.errors()[0].get('msg')}", None))
    return jobs


# ============================================
# Results
# ============================================

class SweepResult:
    """Per-run rows plus per-point aggregates of one sweep."""

    def __init__(self, spec: SweepSpec, rows: pd.DataFrame):
        self.spec = spec
        self.keys = ["variant", *spec.param_names]
        self.rows = rows
        self.aggregates = aggregate(rows, self.keys)

    @property
    def failures(self) -> int:
        return int((self.rows["error"] != "").sum())

    def table(self) -> pd.DataFrame:
        """Run rows followed by aggregate rows, in a stable column order."""
        runs = self.rows.copy()
        runs.insert(0, "row_type", "run")
        combined = pd.concat([runs, self.aggregates], ignore_index=True)
        columns = ["row_type", *self.keys, "seed", *METRIC_COLUMNS, "error"]
        combined = combined[columns].copy()
        combined["error"] = combined["error"].fillna("")
        combined["seed"] = combined["seed"].astype("Int64")
        return combined

    def sign_tests(self, metric: str = "cooperating_delivery_ratio") -> pd.DataFrame:
        variants = list(self.spec.variants)
        if len(variants) != 2:
            return pd.DataFrame()
        return sign_test(self.rows, variants[0], variants[1], self.spec.param_names, metric)

    def to_dict(self) -> dict[str, Any]:
        def records(frame: pd.DataFrame) -> list[dict[str, Any]]:
            return json.loads(frame.to_json(orient="records")) if not frame.empty else []

        return {
            "name": self.spec.name,
            "params": self.spec.param_names,
            "runs_per_point": self.spec.runs_per_point,
            "failures": self.failures,
            "rows": records(self.rows),
            "aggregates": records(self.aggregates),
            "sign_tests": records(self.sign_tests()),
        }


def aggregate(rows: pd.DataFrame, keys: list[str]) -> pd.DataFrame:
    """Mean, sample std and std/mean of every metric per point."""
    ok = rows[rows["error"] == ""]
    grouped = ok.groupby(keys, sort=False, dropna=False)[list(METRIC_COLUMNS)]

    mean = grouped.mean()
    std = grouped.std(ddof=1).fillna(0.0)
    cv = (std / mean.where(mean != 0)).astype(float)

    frames = []
    for kind, frame in zip(AGGREGATE_KINDS, (mean, std, cv)):
        frame = frame.reset_index()
        frame.insert(0, "row_type", kind)
        frames.append(frame)
    if not frames or all(frame.empty for frame in frames):
        return pd.DataFrame(columns=["row_type", *keys, *METRIC_COLUMNS])

    combined = pd.concat(frames, ignore_index=True)
    # Interleave so each point's mean/std/cv rows sit together
    combined["_order"] = combined.groupby("row_type").cumcount()
    combined["_kind"] = combined["row_type"].map({kind: i for i, kind in enumerate(AGGREGATE_KINDS)})
    combined = combined.sort_values(["_order", "_kind"], kind="stable").drop(columns=["_order", "_kind"])
    combined["seed"] = math.nan
    combined["error"] = ""
    return combined.reset_index(drop=True)


def sign_test(
    rows: pd.DataFrame, first: str, second: str, params: list[str], metric: str
) -> pd.DataFrame:
    """Paired one-sided sign test per point between two variants, paired by seed."""
    ok = rows[rows["error"] == ""]
    a = ok[ok["variant"] == first].set_index([*params, "seed"])[metric]
    b = ok[ok["variant"] == second].set_index([*params, "seed"])[metric]
    paired = pd.concat({"first": a, "second": b}, axis=1).dropna()

    results = []
    if not params:
        groups = [((), paired)]
    else:
        groups = paired.groupby(level=params[0] if len(params) == 1 else params, sort=False)
    for cell, frame in groups:
        cell = cell if isinstance(cell, tuple) else (cell,)
        diff = frame["first"] - frame["second"]
        wins_first = int((diff > 0).sum())
        wins_second = int((diff < 0).sum())
        trials = wins_first + wins_second
        record: dict[str, Any] = dict(zip(params, cell))
        record.update(
            metric=metric,
            first=first,
            second=second,
            wins_first=wins_first,
            wins_second=wins_second,
            ties=int((diff == 0).sum()),
            p_first_greater=binomtest(wins_first, trials, 0.5, alternative="greater").pvalue if trials else 1.0,
            p_second_greater=binomtest(wins_second, trials, 0.5, alternative="greater").pvalue if trials else 1.0,
        )
        results.append(record)
    return pd.DataFrame(results)


# ============================================
# Sweep
# ============================================

def run_sweep(
    spec: SweepSpec, workers: Optional[int] = None, trace_dir: Optional[Path | str] = None
) -> SweepResult:
    """Run every (variant, point, seed) of `spec`; failed runs are recorded, not raised."""
    workers = workers or settings.sweep_workers
    jobs = _build_jobs(spec, ensure_dir(trace_dir) if trace_dir else None)
    per_point = spec.runs_per_point
    logger.info(
        "sweep %s: %d points x %d seeds on %d worker(s)",
        spec.name, len(jobs) // per_point, per_point, workers,
    )

    rows: list[dict[str, Any]] = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_run_job, jobs, chunksize=max(1, per_point // workers))
            for row in results:
                rows.append(row)
                _log_progress(rows, per_point, len(jobs))
    else:
        for job in jobs:
            rows.append(_run_job(job))
            _log_progress(rows, per_point, len(jobs))

    frame = pd.DataFrame(rows)
    if "error" not in frame:
        frame["error"] = ""
    return SweepResult(spec, frame)


def _log_progress(rows: list[dict[str, Any]], per_point: int, total: int) -> None:
    if len(rows) % per_point:
        return
    last = rows[-1]
    logger.info("point done (%d/%d runs): variant=%s", len(rows), total, last["variant"])


def summary_text(result: SweepResult) -> str:
    """Human-readable digest of a sweep: per-point means and, for two variants, sign tests."""
    lines = [f"sweep: {result.spec.name}", f"runs per point: {result.spec.runs_per_point}"]
    if result.failures:
        lines.append(f"failed runs: {result.failures}")
    lines.append("")

    headline = [
        "delivery_ratio",
        "cooperating_delivery_ratio",
        "misleading_delivery_ratio",
        "selfish_delivery_ratio",
    ]
    aggregates = result.aggregates
    means = aggregates[aggregates["row_type"] == "mean"].reset_index(drop=True)
    stds = aggregates[aggregates["row_type"] == "std"].reset_index(drop=True)
    cvs = aggregates[aggregates["row_type"] == "cv"].reset_index(drop=True)
    for i in range(len(means)):
        label = ", ".join(f"{key}={means.loc[i, key]}" for key in result.keys)
        lines.append(label)
        for column in headline:
            cv = cvs.loc[i, column]
            cv_text = "n/a" if pd.isna(cv) else f"{cv:.2f}"
            lines.append(
                f"  {column:<28} {means.loc[i, column]:.4f} +/- {stds.loc[i, column]:.4f} (std/mean {cv_text})"
            )

    tests = result.sign_tests()
    if not tests.empty:
        lines.append("")
        lines.append(f"sign test on cooperating_delivery_ratio: {tests.loc[0, 'first']} vs {tests.loc[0, 'second']}")
        for _, test in tests.iterrows():
            label = ", ".join(f"{p}={test[p]}" for p in result.spec.param_names) or "all"
            lines.append(
                f"  {label}: wins {test['wins_first']}-{test['wins_second']} (ties {test['ties']}), "
                f"p(first>second)={test['p_first_greater']:.4f}, p(second>first)={test['p_second_greater']:.4f}"
            )
    return "\n".join(lines) + "\n"
