# app/core/presets.py

"""
Built-in sweep designs, named fig1 .. fig7.

Every design starts from the default scenario (40 nodes, 1500 m x 300 m,
20 m/s, 250 m range, 8-packet connections) and varies one or two knobs.
Weak links are emulated with a 25% per-delivery loss wherever the outcome
depends on false positives or second chances: at that rate a neighbor's
forward goes unheard often enough for an honest rating to random-walk
below a small threshold, while thresholds of -40 and below stay out of
reach.
"""

from typing import Any, Callable, Optional

from app.config import get_settings
from app.core.errors import ConfigError
from app.models.scenario import ScenarioConfig, SweepAxis, SweepSpec

settings = get_settings()

WEAK_LINK_LOSS = 0.25

# Offered load of the misbehavior designs: twice the default connection count
LOADED_CONNECTIONS = 20

# OCEAN tuned for a 100 s run: two dropped packets fault a neighbor and the
# verdict outlives most of the run
FAST_DETECTION = {"faulty_threshold": -2, "faulty_timeout": 60.0}

MODES_OCEAN_SECHAND = {
    "ocean": {"mode": "ocean"},
    "sechand": {"mode": "sechand"},
}


def _spec(
    name: str,
    base: dict[str, Any],
    axes: list[tuple[str, list[Any]]],
    variants: dict[str, dict[str, Any]],
) -> SweepSpec:
    return SweepSpec(
        name=name,
        base=ScenarioConfig(**base),
        axes=[SweepAxis(param=param, values=values) for param, values in axes],
        variants=variants,
        runs_per_point=settings.default_runs_per_point,
    )


# ============================================
# Figure designs
# ============================================

def fig1() -> SweepSpec:
    """Cooperating throughput against the number of misbehaving nodes."""
    return _spec(
        "fig1",
        {"pause_time": 0.0, "concurrent_connections": LOADED_CONNECTIONS},
        [("num_misbehaving", [0, 4, 8, 10, 12, 16, 20, 24, 28, 32, 36, 40])],
        {
            "ocean": {"mode": "ocean", "misbehaving_kind": "misleading", **FAST_DETECTION},
            "defenseless": {"mode": "defenseless", "misbehaving_kind": "misleading"},
            "defenseless-selfish": {"mode": "defenseless", "misbehaving_kind": "selfish"},
        },
    )


def fig2() -> SweepSpec:
    """Direct observation against second-hand alarms over threshold and mobility."""
    return _spec(
        "fig2",
        {
            "num_misbehaving": 10,
            "link_loss_prob": WEAK_LINK_LOSS,
            "concurrent_connections": LOADED_CONNECTIONS,
            "sim_duration": 200.0,
        },
        [("faulty_threshold", [-10, -20, -40, -80]), ("pause_time", [0.0, 20.0, 50.0, 100.0])],
        MODES_OCEAN_SECHAND,
    )


def fig3() -> SweepSpec:
    """Both protocols over the faulty timeout and threshold with weak links."""
    return _spec(
        "fig3",
        {
            "num_misbehaving": 10,
            "link_loss_prob": WEAK_LINK_LOSS,
            "pause_time": 0.0,
            "concurrent_connections": LOADED_CONNECTIONS,
            "sim_duration": 200.0,
        },
        [("faulty_timeout", [2.0, 5.0, 10.0, 20.0, 40.0, 80.0]), ("faulty_threshold", [-10, -40])],
        MODES_OCEAN_SECHAND,
    )


def fig4() -> SweepSpec:
    """Misleading-node throughput over the faulty threshold."""
    return _spec(
        "fig4",
        {"num_misbehaving": 5, "link_loss_prob": WEAK_LINK_LOSS, "pause_time": 0.0},
        [("faulty_threshold", [-10, -20, -40, -80])],
        {"defenseless": {"mode": "defenseless"}, **MODES_OCEAN_SECHAND},
    )


def fig5() -> SweepSpec:
    """Misleading-node throughput over the faulty timeout."""
    return _spec(
        "fig5",
        {"num_misbehaving": 5, "link_loss_prob": WEAK_LINK_LOSS, "pause_time": 0.0},
        [("faulty_timeout", [5.0, 10.0, 20.0, 40.0, 80.0])],
        MODES_OCEAN_SECHAND,
    )


def fig6() -> SweepSpec:
    """Avoid-list tampering by misleading nodes."""
    return _spec(
        "fig6",
        {"mode": "ocean", "pause_time": 0.0},
        [("num_misbehaving", [0, 5, 10])],
        {
            "ocean": {"misleading_rush": False},
            "ocean-rushing": {"misleading_rush": True},
        },
    )


def fig7() -> SweepSpec:
    """Chip accumulation rate against selfish and cooperating throughput."""
    return _spec(
        "fig7",
        {
            "mode": "ocean",
            "economy": True,
            "misbehaving_kind": "selfish",
            "num_misbehaving": 5,
            "pause_time": 0.0,
        },
        [("car", [0.0, 0.05, 0.1, 0.25, 0.5, 1.0])],
        {
            "optimistic": {"chip_scheme": "optimistic"},
            "pessimistic": {"chip_scheme": "pessimistic"},
        },
    )


PRESETS: dict[str, Callable[[], SweepSpec]] = {
    "fig1": fig1,
    "fig2": fig2,
    "fig3": fig3,
    "fig4": fig4,
    "fig5": fig5,
    "fig6": fig6,
    "fig7": fig7,
}


def list_presets() -> dict[str, str]:
    return {name: (builder.__doc__ or "").strip() for name, builder in PRESETS.items()}


def preset(
    name: str,
    runs_per_point: Optional[int] = None,
    sim_duration: Optional[float] = None,
    seed_base: Optional[int] = None,
) -> SweepSpec:
    """A named design with optional run-size overrides."""
    builder = PRESETS.get(name)
    if builder is None:
        raise ConfigError(f"unknown preset '{name}'; choose from {sorted(PRESETS)}", ["preset"])

    spec = builder()
    update: dict[str, Any] = {}
    if runs_per_point is not None:
        update["runs_per_point"] = runs_per_point
    if seed_base is not None:
        update["seed_base"] = seed_base
    if sim_duration is not None:
        update["base"] = spec.base.model_copy(update={"sim_duration": sim_duration})
    return SweepSpec.model_validate({**spec.model_dump(), **update}) if update else spec
