# app/models/__init__.py

from app.models.packet import (
    DataPacket,
    Digest,
    NodeId,
    Packet,
    PacketKind,
    RouteError,
    RouteReply,
    RouteRequest,
    SimTime,
    packet_digest,
)
from app.models.observation import (
    BehaviorKind,
    BehaviorProfile,
    ChecksumBufferEntry,
    FaultyTransition,
    NeighborRating,
    ObservationEvent,
    ObservationSign,
    RankerParams,
)
from app.models.scenario import (
    ChipScheme,
    Mode,
    ScenarioConfig,
    SweepAxis,
    SweepPoint,
    SweepSpec,
)
from app.models.metrics import (
    ClassMetrics,
    DropCause,
    NodeClass,
    RunMetrics,
)

__all__ = [
    # Packets
    "DataPacket",
    "Digest",
    "NodeId",
    "Packet",
    "PacketKind",
    "RouteError",
    "RouteReply",
    "RouteRequest",
    "SimTime",
    "packet_digest",
    # Observation
    "BehaviorKind",
    "BehaviorProfile",
    "ChecksumBufferEntry",
    "FaultyTransition",
    "NeighborRating",
    "ObservationEvent",
    "ObservationSign",
    "RankerParams",
    # Scenario
    "ChipScheme",
    "Mode",
    "ScenarioConfig",
    "SweepAxis",
    "SweepPoint",
    "SweepSpec",
    # Metrics
    "ClassMetrics",
    "DropCause",
    "NodeClass",
    "RunMetrics",
]
