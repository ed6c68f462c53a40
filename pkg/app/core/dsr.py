# app/core/dsr.py

"""
Source routing with avoid lists.

`SourceRouter` holds one node's DSR state (route cache, duplicate-request
cache, sequence counters) and turns received control and data packets into
decisions. It never transmits anything itself; the node glue acts on the
returned decisions.
"""

import logging
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict

from app.core.route_ranker import RouteRanker
from app.models.packet import (
    DataPacket,
    NodeId,
    RouteError,
    RouteReply,
    RouteRequest,
    SimTime,
    contains_link,
)

logger = logging.getLogger(__name__)


# ============================================
# Decisions
# ============================================

RreqAction = Literal["suppress", "rebroadcast", "reply"]
RrepAction = Literal["accept_route", "relay", "drop"]
DataAction = Literal["forward", "deliver", "reject_malicious", "drop_no_route", "protocol_error"]


class RreqDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    action: RreqAction
    packet: Optional[RouteRequest | RouteReply] = None
    reason: Optional[str] = None


class RrepDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    action: RrepAction
    packet: Optional[RouteReply] = None
    next_hop: Optional[NodeId] = None


class DataDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    action: DataAction
    packet: Optional[DataPacket] = None
    next_hop: Optional[NodeId] = None
    reason: Optional[str] = None


# ============================================
# Route cache
# ============================================

class CachedRoute(BaseModel):
    model_config = ConfigDict(frozen=True)

    hops: tuple[NodeId, ...]
    learned_at: SimTime


class RouteCache:
    """Source routes per destination with staleness eviction."""

    def __init__(self, owner: NodeId, lifetime_us: SimTime):
        self.owner = owner
        self.lifetime_us = lifetime_us
        self._routes: dict[NodeId, dict[tuple[NodeId, ...], SimTime]] = {}

    def add(self, hops: tuple[NodeId, ...], now: SimTime) -> None:
        self._routes.setdefault(hops[-1], {})[tuple(hops)] = now

    def routes_to(self, dst: NodeId, now: SimTime) -> list[CachedRoute]:
        table = self._routes.get(dst)
        if not table:
            return []
        stale = [hops for hops, learned in table.items() if now - learned >= self.lifetime_us]
        for hops in stale:
            del table[hops]
        return [CachedRoute(hops=hops, learned_at=learned) for hops, learned in table.items()]

    def remove_link(self, a: NodeId, b: NodeId) -> int:
        """Remove every cached route traversing the link a-b in either direction."""
        removed = 0
        for table in self._routes.values():
            doomed = [hops for hops in table if contains_link(hops, a, b)]
            for hops in doomed:
                del table[hops]
            removed += len(doomed)
        return removed

    def select(
        self, dst: NodeId, now: SimTime, faulty: frozenset[NodeId] = frozenset()
    ) -> Optional[tuple[NodeId, ...]]:
        """Shortest good route, then most recently learned, then lowest hop order."""
        good = [
            route
            for route in self.routes_to(dst, now)
            if len(route.hops) == 2 or route.hops[1] not in faulty
        ]
        if not good:
            return None
        best = min(good, key=lambda route: (len(route.hops), -route.learned_at, route.hops))
        return best.hops

    def __len__(self) -> int:
        return sum(len(table) for table in self._routes.values())


# ============================================
# Router
# ============================================

class SourceRouter:
    """DSR decisions for one node."""

    def __init__(
        self,
        owner: NodeId,
        ranker: Optional[RouteRanker] = None,
        cache_lifetime_us: SimTime = 30_000_000,
        hop_limit: int = 16,
    ):
        self.owner = owner
        self.ranker = ranker
        self.hop_limit = hop_limit
        self.cache = RouteCache(owner, cache_lifetime_us)
        self.seen: set[tuple[NodeId, int]] = set()
        self._rreq_seq = 0
        self._rerr_seq = 0

    def faulty_list(self) -> frozenset[NodeId]:
        return self.ranker.faulty_list() if self.ranker else frozenset()

    def is_faulty(self, node: NodeId) -> bool:
        return self.ranker.is_faulty(node) if self.ranker else False

    # ----------------------------------------
    # Discovery
    # ----------------------------------------

    def originate_rreq(self, dst: NodeId, now: SimTime) -> RouteRequest:
        seq = self._rreq_seq
        self._rreq_seq += 1
        self.seen.add((self.owner, seq))
        return RouteRequest(
            src=self.owner,
            dst=dst,
            seq=seq,
            route_record=(self.owner,),
            avoid_list=self.faulty_list(),
            hop_limit=self.hop_limit,
        )

    def is_stale_rreq(self, packet: RouteRequest) -> bool:
        """A well-formed copy this node has already handled and is not the target of."""
        record = packet.route_record
        return (
            packet.dst != self.owner
            and (packet.src, packet.seq) in self.seen
            and bool(record)
            and record[0] == packet.src
            and len(set(record)) == len(record)
        )

    def handle_rreq(self, packet: RouteRequest, now: SimTime) -> RreqDecision:
        record = packet.route_record
        if len(set(record)) != len(record) or not record or record[0] != packet.src:
            return RreqDecision(action="suppress", reason="malformed")

        key = (packet.src, packet.seq)
        duplicate = key in self.seen
        self.seen.add(key)
        is_target = packet.dst == self.owner

        if self.owner in record:
            return RreqDecision(action="suppress", reason="loop")
        if duplicate and not is_target:
            return RreqDecision(action="suppress", reason="duplicate")
        if packet.avoid_list.intersection(record):
            return RreqDecision(action="suppress", reason="avoided_hop")

        if is_target:
            route = record + (self.owner,)
            reply = RouteReply(
                src=self.owner,
                dst=packet.src,
                seq=packet.seq,
                route=route,
                index=len(route) - 1,
            )
            return RreqDecision(action="reply", packet=reply)

        if self.owner in packet.avoid_list:
            return RreqDecision(action="suppress", reason="self_avoided")
        if len(record) >= self.hop_limit:
            return RreqDecision(action="suppress", reason="hop_limit")

        rebroadcast = packet.model_copy(
            update={
                "route_record": record + (self.owner,),
                "avoid_list": packet.avoid_list | self.faulty_list(),
            }
        )
        return RreqDecision(action="rebroadcast", packet=rebroadcast)

    def handle_rrep(self, packet: RouteReply, now: SimTime) -> RrepDecision:
        """Originator accepts or drops; relays check then pass toward the originator."""
        if packet.route[packet.index] != self.owner:
            return RrepDecision(action="drop")
        # The replying destination is exempt
        if self.faulty_list().intersection(packet.route[:-1]):
            return RrepDecision(action="drop")

        if packet.index == 0:
            self.cache.add(packet.route, now)
            logger.debug("node %s learned route %s", self.owner, packet.route)
            return RrepDecision(action="accept_route")

        onward = packet.model_copy(update={"index": packet.index - 1})
        return RrepDecision(action="relay", packet=onward, next_hop=packet.route[packet.index - 1])

    def select_route(self, dst: NodeId, now: SimTime) -> Optional[tuple[NodeId, ...]]:
        return self.cache.select(dst, now, self.faulty_list())

    # ----------------------------------------
    # Data plane
    # ----------------------------------------

    def forward_data(self, packet: DataPacket, prev_hop: Optional[NodeId]) -> DataDecision:
        """
        Decide what to do with a DATA packet held at `route[index]`.

        `prev_hop` is None for self-originated packets, which are never
        rejected by their own source. The destination rejects like any relay.
        A faulty next hop blocks forwarding unless it is the destination itself.
        """
        route = packet.route
        if packet.index >= len(route) or route[packet.index] != self.owner:
            return DataDecision(action="protocol_error", reason="cursor")

        if prev_hop is not None and self.is_faulty(prev_hop):
            return DataDecision(action="reject_malicious", reason=f"previous hop {prev_hop} is faulty")

        if packet.index == len(route) - 1:
            return DataDecision(action="deliver", packet=packet)

        next_hop = route[packet.index + 1]
        if next_hop != route[-1] and self.is_faulty(next_hop):
            return DataDecision(action="drop_no_route", next_hop=next_hop, reason="faulty next hop")

        onward = packet.model_copy(update={"index": packet.index + 1})
        return DataDecision(action="forward", packet=onward, next_hop=next_hop)

    def handle_broken_link(
        self, packet: DataPacket, failed_next: NodeId, now: SimTime
    ) -> Optional[RouteError]:
        """Purge the link and build a RERR toward the source; None at the source itself."""
        self.cache.remove_link(self.owner, failed_next)

        if self.owner not in packet.route:
            return None
        position = packet.route.index(self.owner)
        if position == 0:
            return None

        return self.route_error_toward(
            packet.route[: position + 1], broken_link=(self.owner, failed_next)
        )

    def route_error_toward(
        self,
        route_prefix: tuple[NodeId, ...],
        broken_link: tuple[NodeId, NodeId],
        alarm: Optional[NodeId] = None,
    ) -> RouteError:
        """RERR that walks `route_prefix` backwards from self to its first node."""
        seq = self._rerr_seq
        self._rerr_seq += 1
        return_route = tuple(reversed(route_prefix))
        return RouteError(
            src=self.owner,
            dst=return_route[-1],
            seq=seq,
            broken_link=broken_link,
            alarm=alarm,
            return_route=return_route,
            index=0,
        )

    def handle_rerr(self, packet: RouteError) -> Optional[tuple[RouteError, NodeId]]:
        """Purge the broken link; return the onward copy and next hop unless self is the end."""
        self.cache.remove_link(*packet.broken_link)

        route = packet.return_route
        if packet.index >= len(route) or route[packet.index] != self.owner:
            return None
        if packet.index == len(route) - 1:
            return None
        onward = packet.model_copy(update={"index": packet.index + 1})
        return onward, route[packet.index + 1]
