# app/models/observation.py

"""
Per-node bookkeeping records exchanged between the watch, the ranker and
the misbehavior models.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.packet import Digest, NodeId, SimTime


# ============================================
# Observations
# ============================================

ObservationSign = Literal["positive", "negative"]
FaultyTransition = Literal["became_faulty"]


class ObservationEvent(BaseModel):
    """Outcome of watching one handoff."""

    model_config = ConfigDict(frozen=True)

    observer: NodeId
    subject: NodeId
    sign: ObservationSign
    time: SimTime

    # Context of the watched packet, used to address alarms upstream
    packet_src: Optional[NodeId] = None
    packet_route: tuple[NodeId, ...] = ()


class ChecksumBufferEntry(BaseModel):
    """A pending expectation that `neighbor` forwards the packet with `digest`."""

    model_config = ConfigDict(frozen=True)

    entry_id: int
    digest: Digest
    neighbor: NodeId
    deadline: SimTime
    packet_src: NodeId
    packet_route: tuple[NodeId, ...] = ()


class NeighborRating(BaseModel):
    """The ranker's view of one node."""

    rating: int
    faulty: bool = False
    last_event: SimTime = 0
    accused: bool = False


# ============================================
# Ranker parameters
# ============================================

class RankerParams(BaseModel):
    """Rating arithmetic. Times are microseconds."""

    model_config = ConfigDict(frozen=True)

    neutral: int = 0
    positive_step: int = Field(default=1, gt=0)
    negative_step: int = Field(default=-2, lt=0)
    faulty_threshold: int = Field(default=-40, lt=0)
    faulty_timeout: SimTime = Field(default=30_000_000, gt=0)
    floor_factor: int = Field(default=5, ge=1)

    @model_validator(mode="after")
    def check_ordering(self) -> "RankerParams":
        if not self.faulty_threshold < self.neutral:
            raise ValueError("faulty_threshold must be below the neutral rating")
        if abs(self.negative_step) <= self.positive_step:
            raise ValueError("negative_step must outweigh positive_step")
        return self

    @property
    def floor(self) -> int:
        return self.floor_factor * self.faulty_threshold


# ============================================
# Behavior
# ============================================

BehaviorKind = Literal["cooperating", "misleading", "selfish", "rushing"]


class BehaviorProfile(BaseModel):
    """How one node deviates from the protocol."""

    model_config = ConfigDict(frozen=True)

    kind: BehaviorKind = "cooperating"
    runs_ocean: bool = True
    tamper_avoid_list: bool = False
    strip_from_avoid: frozenset[NodeId] = frozenset()
    route_padding: int = Field(default=0, ge=0)
    bogus_hops: int = Field(default=0, ge=0)

    @property
    def is_misbehaving(self) -> bool:
        return self.kind != "cooperating"
