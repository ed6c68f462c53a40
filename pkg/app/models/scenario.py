# app/models/scenario.py

"""
Scenario and sweep descriptions.

Every knob of a run is a flat field so config files, CLI overrides and HTTP
bodies address them by the same name. Human-facing durations are seconds
(or milliseconds where the field name says so); the engine converts them to
integer microseconds.
"""

import math
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.observation import BehaviorKind, RankerParams
from app.models.packet import MILLISECOND, SECOND, to_us


Mode = Literal["defenseless", "ocean", "sechand"]
ChipScheme = Literal["optimistic", "pessimistic"]


# ============================================
# Compact encodings used by config files
# ============================================

def _parse_positions(value: Any) -> Any:
    if not isinstance(value, str):
        return value
    text = value.strip()
    if not text:
        return None
    pairs = []
    for chunk in text.split(";"):
        x, y = chunk.split(":")
        pairs.append((float(x), float(y)))
    return pairs


def _parse_connections(value: Any) -> Any:
    if not isinstance(value, str):
        return value
    text = value.strip()
    if not text:
        return None
    pairs = []
    for chunk in text.split(","):
        src, dst = chunk.split("-")
        pairs.append((int(src), int(dst)))
    return pairs


def _parse_node_behaviors(value: Any) -> Any:
    if not isinstance(value, str):
        return value
    text = value.strip()
    if not text:
        return {}
    result = {}
    for chunk in text.split(","):
        node, kind = chunk.split(":")
        result[int(node)] = kind.strip()
    return result


def _parse_id_list(value: Any) -> Any:
    if not isinstance(value, str):
        return value
    text = value.strip()
    if not text:
        return []
    return [int(chunk) for chunk in text.split(",")]


# ============================================
# Scenario
# ============================================

class ScenarioConfig(BaseModel):
    """Full description of one simulation run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    seed: int = Field(default=0, ge=0, lt=2**64)
    mode: Mode = "ocean"

    # Topology and radio
    num_nodes: int = Field(default=40, ge=1)
    area_width: float = Field(default=1500.0, gt=0)
    area_height: float = Field(default=300.0, gt=0)
    radio_range: float = Field(default=250.0, gt=0)
    raw_bandwidth: int = Field(default=2_000_000, gt=0, description="bits per second")
    header_bytes: int = Field(default=40, ge=0)
    per_hop_overhead_us: int = Field(default=0, ge=0)
    uniform_tx_time_us: Optional[int] = Field(default=None, gt=0)
    link_loss_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    positions: Optional[list[tuple[float, float]]] = None

    # Mobility
    min_speed: float = Field(default=1.0, gt=0)
    max_speed: float = Field(default=20.0, gt=0)
    pause_time: float = Field(default=0.0, ge=0, description="seconds; inf keeps nodes static")

    # Traffic
    concurrent_connections: int = Field(default=10, ge=0)
    packets_per_connection: int = Field(default=8, ge=1)
    min_connection_hops: int = Field(default=2, ge=1)
    source_rate: float = Field(default=4.0, gt=0, description="packets per second")
    payload_size: int = Field(default=64, gt=0)
    connections: Optional[list[tuple[int, int]]] = None

    # Run control
    sim_duration: float = Field(default=100.0, gt=0)
    sample_interval: float = Field(default=1.0, gt=0)

    # Watch and ranker
    watch_timeout_ms: float = Field(default=1.0, gt=0)
    neutral_rating: int = 0
    positive_step: int = Field(default=1, gt=0)
    negative_step: int = Field(default=-2, lt=0)
    faulty_threshold: int = Field(default=-40, lt=0)
    faulty_timeout: float = Field(default=30.0, gt=0)
    rating_floor_factor: int = Field(default=5, ge=1)

    # DSR
    rreq_jitter_min_ms: float = Field(default=0.0, ge=0)
    rreq_jitter_max_ms: float = Field(default=10.0, ge=0)
    mac_retransmit_budget: int = Field(default=3, ge=1)
    route_cache_lifetime: float = Field(default=30.0, gt=0)
    hop_limit: int = Field(default=16, ge=1)
    send_buffer_timeout: float = Field(default=30.0, gt=0)
    discovery_timeout: float = Field(default=0.5, gt=0)
    max_discovery_attempts: int = Field(default=3, ge=1)

    # Chipcount economy
    economy: bool = False
    chip_scheme: ChipScheme = "optimistic"
    car: float = Field(default=0.0, ge=0, description="chips per second")
    spend_threshold: float = 0.0
    initial_balance: float = 0.0
    chip_ceiling: float = Field(default=100.0, gt=0)

    # Behavior assignment
    misbehaving_kind: BehaviorKind = "misleading"
    num_misbehaving: int = Field(default=0, ge=0)
    num_rushing: int = Field(default=0, ge=0)
    node_behaviors: dict[int, BehaviorKind] = Field(default_factory=dict)
    misleading_rush: bool = False
    rush_strip: list[int] = Field(default_factory=list)
    route_padding: int = Field(default=0, ge=0)
    bogus_hops: int = Field(default=0, ge=0)
    misbehaving_runs_ocean: bool = True

    @field_validator("positions", mode="before")
    @classmethod
    def parse_positions(cls, value: Any) -> Any:
        return _parse_positions(value)

    @field_validator("connections", mode="before")
    @classmethod
    def parse_connections(cls, value: Any) -> Any:
        return _parse_connections(value)

    @field_validator("node_behaviors", mode="before")
    @classmethod
    def parse_node_behaviors(cls, value: Any) -> Any:
        return _parse_node_behaviors(value)

    @field_validator("rush_strip", mode="before")
    @classmethod
    def parse_rush_strip(cls, value: Any) -> Any:
        return _parse_id_list(value)

    @model_validator(mode="after")
    def check_consistency(self) -> "ScenarioConfig":
        if self.min_speed > self.max_speed:
            raise ValueError("min_speed must not exceed max_speed")
        if self.rreq_jitter_min_ms > self.rreq_jitter_max_ms:
            raise ValueError("rreq_jitter_min_ms must not exceed rreq_jitter_max_ms")
        if self.misbehaving_kind == "cooperating" and self.num_misbehaving:
            raise ValueError("misbehaving_kind cannot be 'cooperating' with num_misbehaving > 0")
        if self.faulty_threshold >= self.neutral_rating:
            raise ValueError("faulty_threshold must be below neutral_rating")
        if abs(self.negative_step) <= self.positive_step:
            raise ValueError("negative_step must outweigh positive_step")

        pinned = len(self.node_behaviors)
        if pinned + self.num_misbehaving + self.num_rushing > self.num_nodes:
            raise ValueError("more behavior assignments than nodes")

        for node in list(self.node_behaviors) + list(self.rush_strip):
            if not 0 <= node < self.num_nodes:
                raise ValueError(f"node id {node} out of range")

        if self.positions is not None:
            if len(self.positions) != self.num_nodes:
                raise ValueError("positions must list exactly num_nodes coordinates")
            for x, y in self.positions:
                if not (0 <= x <= self.area_width and 0 <= y <= self.area_height):
                    raise ValueError(f"position ({x}, {y}) outside the area")

        if self.connections is not None:
            for src, dst in self.connections:
                if src == dst:
                    raise ValueError("a connection needs distinct endpoints")
                if not (0 <= src < self.num_nodes and 0 <= dst < self.num_nodes):
                    raise ValueError(f"connection {src}-{dst} out of range")
        return self

    # ----------------------------------------
    # Derived values in engine units
    # ----------------------------------------

    @property
    def is_static(self) -> bool:
        return math.isinf(self.pause_time)

    @property
    def duration_us(self) -> int:
        return to_us(self.sim_duration)

    @property
    def watch_timeout_us(self) -> int:
        return int(round(self.watch_timeout_ms * MILLISECOND))

    @property
    def packet_interval_us(self) -> int:
        return int(round(SECOND / self.source_rate))

    def ranker_params(self) -> RankerParams:
        return RankerParams(
            neutral=self.neutral_rating,
            positive_step=self.positive_step,
            negative_step=self.negative_step,
            faulty_threshold=self.faulty_threshold,
            faulty_timeout=to_us(self.faulty_timeout),
            floor_factor=self.rating_floor_factor,
        )


SCENARIO_FIELDS = frozenset(ScenarioConfig.model_fields)


# ============================================
# Sweeps
# ============================================

class SweepAxis(BaseModel):
    """One swept parameter and its values."""

    param: str
    values: list[Any] = Field(min_length=1)

    @field_validator("param")
    @classmethod
    def known_param(cls, value: str) -> str:
        if value not in SCENARIO_FIELDS or value == "seed":
            raise ValueError(f"unknown sweep parameter '{value}'")
        return value


class SweepPoint(BaseModel):
    """A (variant, parameter values) cell of a sweep."""

    model_config = ConfigDict(frozen=True)

    variant: str
    params: dict[str, Any]


class SweepSpec(BaseModel):
    """A multi-seed experiment over one or two parameters and named variants."""

    model_config = ConfigDict(extra="forbid")

    name: str = "sweep"
    base: ScenarioConfig = Field(default_factory=ScenarioConfig)
    axes: list[SweepAxis] = Field(default_factory=list, max_length=2)
    variants: dict[str, dict[str, Any]] = Field(default_factory=dict)
    runs_per_point: int = Field(default=20, ge=1)
    seed_base: int = Field(default=0, ge=0)

    @field_validator("variants")
    @classmethod
    def known_overrides(cls, value: dict[str, dict[str, Any]]) -> dict[str, dict[str, Any]]:
        for name, overrides in value.items():
            unknown = set(overrides) - SCENARIO_FIELDS
            if unknown:
                raise ValueError(f"variant '{name}' sets unknown fields: {sorted(unknown)}")
        return value

    @property
    def param_names(self) -> list[str]:
        return [axis.param for axis in self.axes]

    @property
    def seeds(self) -> list[int]:
        return list(range(self.seed_base, self.seed_base + self.runs_per_point))

    def points(self) -> list[SweepPoint]:
        """Cells in stable order: variant, then first axis, then second axis."""
        variant_names = list(self.variants) or ["base"]
        grids: list[dict[str, Any]] = [{}]
        for axis in self.axes:
            grids = [{**cell, axis.param: value} for cell in grids for value in axis.values]
        return [SweepPoint(variant=name, params=cell) for name in variant_names for cell in grids]

    def total_runs(self) -> int:
        return len(self.points()) * self.runs_per_point

    def config_for(self, point: SweepPoint, seed: int) -> ScenarioConfig:
        data = self.base.model_dump()
        data.update(self.variants.get(point.variant, {}))
        data.update(point.params)
        data["seed"] = seed
        return ScenarioConfig.model_validate(data)
