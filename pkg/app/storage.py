# app/storage.py

"""
File persistence for the harness.

Scenario and sweep files are flat key=value text read with python-dotenv;
results are written as CSV (pandas), plain-text summaries, JSON metrics and
JSON-lines packet traces.
"""

import json
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from app.core.errors import ConfigError
from app.models.metrics import RunMetrics
from app.models.scenario import ScenarioConfig, SweepSpec

if TYPE_CHECKING:
    from app.core.experiment import SweepResult

logger = logging.getLogger(__name__)

SWEEP_KEYS = ("name", "sweep_param", "sweep_values", "sweep2_param", "sweep2_values", "runs_per_point", "seed_base")
VARIANT_PREFIX = "variant."

DATA_FILE = "data.csv"
SUMMARY_FILE = "summary.txt"
METRICS_FILE = "metrics.json"
TRACE_FILE = "trace.jsonl"


# ============================================
# Reading
# ============================================

def _read_pairs(path: Path) -> dict[str, str]:
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", ["config"])
    values = dotenv_values(path)
    # keys without a value fall back to their defaults
    return {key: value for key, value in values.items() if value not in (None, "")}


def _scalar(text: str) -> Any:
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _parse_variant(name: str, text: str) -> dict[str, str]:
    overrides = {}
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition(":")
        if not sep:
            raise ConfigError(f"variant '{name}': expected key:value, got '{item}'", [f"{VARIANT_PREFIX}{name}"])
        overrides[key.strip()] = value.strip()
    return overrides


def scenario_from_mapping(values: dict[str, Any], source: str = "config") -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(values)
    except ValidationError as exc:
        raise ConfigError.from_validation(exc, source) from exc


def load_scenario_file(path: Path | str, overrides: Optional[dict[str, Any]] = None) -> ScenarioConfig:
    """Read a scenario file; `overrides` (e.g. CLI flags) win over file values."""
    path = Path(path)
    values: dict[str, Any] = dict(_read_pairs(path))
    values.update(overrides or {})
    return scenario_from_mapping(values, str(path))


def load_sweep_file(path: Path | str, overrides: Optional[dict[str, Any]] = None) -> SweepSpec:
    """
    Read a sweep file: scenario keys form the base, `sweep_param` /
    `sweep_values` (and optionally `sweep2_*`) the axes, and every
    `variant.<name>=key:value;key:value` line one curve.
    """
    path = Path(path)
    pairs = _read_pairs(path)

    base: dict[str, Any] = {}
    sweep: dict[str, str] = {}
    variants: dict[str, dict[str, str]] = {}
    for key, value in pairs.items():
        if key.startswith(VARIANT_PREFIX):
            name = key[len(VARIANT_PREFIX):]
            variants[name] = _parse_variant(name, value)
        elif key in SWEEP_KEYS:
            sweep[key] = value
        else:
            base[key] = value
    base.update(overrides or {})

    axes = []
    for param_key, values_key in (("sweep_param", "sweep_values"), ("sweep2_param", "sweep2_values")):
        if param_key not in sweep:
            continue
        if values_key not in sweep:
            raise ConfigError(f"{param_key} given without {values_key}", [values_key])
        values = [_scalar(item) for item in sweep[values_key].split(",") if item.strip()]
        axes.append({"param": sweep[param_key], "values": values})

    spec: dict[str, Any] = {
        "name": sweep.get("name", path.stem),
        "base": scenario_from_mapping(base, str(path)),
        "axes": axes,
        "variants": variants,
    }
    if "runs_per_point" in sweep:
        spec["runs_per_point"] = sweep["runs_per_point"]
    if "seed_base" in sweep:
        spec["seed_base"] = sweep["seed_base"]

    try:
        return SweepSpec.model_validate(spec)
    except ValidationError as exc:
        raise ConfigError.from_validation(exc, str(path)) from exc


# ============================================
# Writing
# ============================================

def ensure_dir(path: Path | str) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(result: "SweepResult", path: Path | str) -> Path:
    path = Path(path)
    result.table().to_csv(path, index=False, float_format="%.12g", encoding="utf-8", lineterminator="\n")
    logger.info("wrote %s", path)
    return path


def write_summary(text: str, path: Path | str) -> Path:
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path


def write_metrics_json(metrics: RunMetrics, path: Path | str) -> Path:
    path = Path(path)
    path.write_text(metrics.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def write_trace_jsonl(trace: Iterable[dict[str, Any]], path: Path | str) -> Path:
    """One JSON object per transmission, in transmission order."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for entry in trace:
            handle.write(json.dumps(entry, separators=(",", ":")) + "\n")
    return path


def trace_file_name(variant: str, params: dict[str, Any], seed: int) -> str:
    parts = [variant, *(f"{key}={value}" for key, value in params.items()), f"seed={seed}"]
    return "_".join(parts).replace("/", "-") + ".jsonl"
