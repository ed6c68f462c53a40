# app/models/metrics.py

"""
Run outcome schemas.
"""

from typing import Literal

from pydantic import BaseModel, Field, computed_field


NodeClass = Literal["cooperating", "misleading", "selfish", "rushing"]
NODE_CLASSES: tuple[NodeClass, ...] = ("cooperating", "misleading", "selfish", "rushing")

DropCause = Literal[
    "dropped_misbehavior",
    "dropped_rejected",
    "dropped_economy",
    "dropped_no_route",
    "dropped_link_loss",
    "dropped_protocol_error",
]
DROP_CAUSES: tuple[DropCause, ...] = (
    "dropped_misbehavior",
    "dropped_rejected",
    "dropped_economy",
    "dropped_no_route",
    "dropped_link_loss",
    "dropped_protocol_error",
)


def _ratio(delivered: int, originated: int) -> float:
    return delivered / originated if originated else 0.0


# ============================================
# Per-class traffic
# ============================================

class ClassMetrics(BaseModel):
    """Traffic originated by the nodes of one behavior class."""

    nodes: int = Field(default=0, ge=0)
    originated: int = Field(default=0, ge=0)
    delivered: int = Field(default=0, ge=0)

    @computed_field
    @property
    def delivery_ratio(self) -> float:
        return _ratio(self.delivered, self.originated)


# ============================================
# Run metrics
# ============================================

class RunMetrics(BaseModel):
    """Everything measured in one simulation run."""

    seed: int
    mode: str
    sim_duration: float

    originated: int = 0
    delivered: int = 0
    in_flight: int = 0
    drops: dict[str, int] = Field(default_factory=lambda: {cause: 0 for cause in DROP_CAUSES})
    classes: dict[str, ClassMetrics] = Field(
        default_factory=lambda: {name: ClassMetrics() for name in NODE_CLASSES}
    )

    rejected_by_node: dict[int, int] = Field(default_factory=dict)
    denied_by_node: dict[int, int] = Field(default_factory=dict)
    faulty_series: list[tuple[float, float]] = Field(
        default_factory=list, description="(time s, mean faulty-list size over OCEAN nodes)"
    )
    alarms: int = 0
    protocol_errors: int = 0
    connection_retries: int = 0
    connections_opened: int = 0
    control_packets: dict[str, int] = Field(default_factory=dict)

    @computed_field
    @property
    def delivery_ratio(self) -> float:
        return _ratio(self.delivered, self.originated)

    def accounted(self) -> int:
        """Delivered plus every drop cause plus what is still in flight."""
        return self.delivered + sum(self.drops.values()) + self.in_flight

    def mean_faulty_list(self) -> float:
        if not self.faulty_series:
            return 0.0
        return sum(size for _, size in self.faulty_series) / len(self.faulty_series)

    def flat_row(self) -> dict[str, float | int]:
        """Scalar columns for one CSV row, in a fixed order."""
        row: dict[str, float | int] = {
            "originated": self.originated,
            "delivered": self.delivered,
            "delivery_ratio": self.delivery_ratio,
        }
        for name in NODE_CLASSES:
            stats = self.classes.get(name, ClassMetrics())
            row[f"{name}_originated"] = stats.originated
            row[f"{name}_delivered"] = stats.delivered
            row[f"{name}_delivery_ratio"] = stats.delivery_ratio
        for cause in DROP_CAUSES:
            row[cause] = self.drops.get(cause, 0)
        row["in_flight"] = self.in_flight
        row["rejected_total"] = sum(self.rejected_by_node.values())
        row["denied_total"] = sum(self.denied_by_node.values())
        row["alarms"] = self.alarms
        row["protocol_errors"] = self.protocol_errors
        row["connection_retries"] = self.connection_retries
        row["mean_faulty_list"] = self.mean_faulty_list()
        return row


METRIC_COLUMNS: tuple[str, ...] = tuple(RunMetrics(seed=0, mode="ocean", sim_duration=0.0).flat_row())
