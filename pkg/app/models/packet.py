# app/models/packet.py

"""
Packets, identities and time.

Packets are in-memory structures with a size model, not a byte-exact DSR
wire format. Every route-carrying packet that is handed to a neighbor carries
the position of the *receiver* in its route (`index`), so a node always finds
itself at `route[index]`.
"""

import hashlib
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from app.core.errors import ContractViolation


# ============================================
# Identities and time
# ============================================

NodeId = int
SimTime = int  # microseconds since simulation start
Digest = int

MILLISECOND = 1_000
SECOND = 1_000_000

ADDRESS_BYTES = 4
DEFAULT_HEADER_BYTES = 40
DEFAULT_PAYLOAD_BYTES = 64

PacketKind = Literal["RREQ", "RREP", "RERR", "DATA"]


def seconds(us: SimTime) -> float:
    return us / SECOND


def to_us(value_s: float) -> SimTime:
    return int(round(value_s * SECOND))


# ============================================
# Packet variants
# ============================================

class PacketBase(BaseModel):
    """Fields shared by every packet kind."""

    model_config = ConfigDict(frozen=True)

    src: NodeId = Field(ge=0)
    dst: NodeId = Field(ge=0)
    seq: int = Field(ge=0)

    def body_bytes(self) -> int:
        return 0


class RouteRequest(PacketBase):
    """Broadcast route discovery; accumulates the route record and avoid list."""

    kind: Literal["RREQ"] = "RREQ"
    route_record: tuple[NodeId, ...]
    avoid_list: frozenset[NodeId] = frozenset()
    hop_limit: int = Field(default=16, ge=1)

    def body_bytes(self) -> int:
        return ADDRESS_BYTES * (len(self.route_record) + len(self.avoid_list))


class RouteReply(PacketBase):
    """Discovered route travelling back to the originator (`dst`)."""

    kind: Literal["RREP"] = "RREP"
    route: tuple[NodeId, ...]
    index: int = Field(ge=0)

    def body_bytes(self) -> int:
        return ADDRESS_BYTES * len(self.route)


class RouteError(PacketBase):
    """Broken-link report travelling back to the traffic source (`dst`)."""

    kind: Literal["RERR"] = "RERR"
    broken_link: tuple[NodeId, NodeId]
    alarm: Optional[NodeId] = None
    return_route: tuple[NodeId, ...]
    index: int = Field(default=0, ge=0)

    def body_bytes(self) -> int:
        extra = 1 if self.alarm is not None else 0
        return ADDRESS_BYTES * (2 + extra + len(self.return_route))


class DataPacket(PacketBase):
    """Application payload following a source route."""

    kind: Literal["DATA"] = "DATA"
    route: tuple[NodeId, ...]
    index: int = Field(default=0, ge=0)
    payload_size: int = Field(default=DEFAULT_PAYLOAD_BYTES, gt=0)
    payload_tag: int = 0
    uid: int = Field(default=0, ge=0)
    created_at: SimTime = 0

    def body_bytes(self) -> int:
        return self.payload_size

    @property
    def holder(self) -> NodeId:
        return self.route[self.index]

    @property
    def is_at_destination(self) -> bool:
        return self.index == len(self.route) - 1


Packet = Annotated[
    Union[RouteRequest, RouteReply, RouteError, DataPacket],
    Field(discriminator="kind"),
]


# ============================================
# Route helpers
# ============================================

def is_valid_route(hops: tuple[NodeId, ...]) -> bool:
    """A source route has at least two hops and never repeats a node."""
    return len(hops) >= 2 and len(set(hops)) == len(hops)


def contains_link(hops: tuple[NodeId, ...], a: NodeId, b: NodeId) -> bool:
    for first, second in zip(hops, hops[1:]):
        if (first, second) == (a, b) or (first, second) == (b, a):
            return True
    return False


def packet_size_bytes(packet: PacketBase, header_bytes: int = DEFAULT_HEADER_BYTES) -> int:
    return header_bytes + packet.body_bytes()


def packet_digest(packet: PacketBase) -> Digest:
    """
    64-bit checksum identifying a DATA packet across hops.

    The hop cursor is excluded because it changes legitimately at every
    forward; everything that identifies the payload is included.
    """
    if not isinstance(packet, DataPacket):
        raise ContractViolation(f"digest requested for a {packet.kind} packet")

    material = "|".join(
        [
            str(packet.src),
            str(packet.dst),
            str(packet.seq),
            ",".join(str(hop) for hop in packet.route),
            str(packet.payload_size),
            str(packet.payload_tag),
        ]
    )
    raw = hashlib.blake2b(material.encode("ascii"), digest_size=8).digest()
    return int.from_bytes(raw, "big")
