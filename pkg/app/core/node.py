# app/core/node.py

"""
One simulated node: the glue between the radio, the router, the watch,
the ranker, the chip ledger, the alarm relay and the node's behavior.
"""

import logging
from collections import deque
from typing import TYPE_CHECKING, NamedTuple, Optional

import numpy as np

from app.core.behavior import decide_data_forward, decide_rreq, pad_route_record, tamper_avoid_list
from app.core.chipcount import ChipLedger
from app.core.dsr import SourceRouter
from app.core.neighbor_watch import NeighborWatch
from app.core.route_ranker import RouteRanker
from app.core.sec_hand import AlarmRelay
from app.models.observation import BehaviorProfile, ObservationEvent
from app.models.packet import (
    MILLISECOND,
    DataPacket,
    NodeId,
    PacketBase,
    RouteError,
    RouteReply,
    RouteRequest,
    SimTime,
    to_us,
)

if TYPE_CHECKING:
    from app.core.engine import Simulator

logger = logging.getLogger(__name__)


class PendingData(NamedTuple):
    uid: int
    seq: int
    created_at: SimTime


class Node:
    """Protocol stack of one node."""

    def __init__(
        self,
        node_id: NodeId,
        sim: "Simulator",
        profile: BehaviorProfile,
        jitter_rng: np.random.Generator,
    ):
        cfg = sim.cfg
        self.id = node_id
        self.sim = sim
        self.cfg = cfg
        self.profile = profile
        self._jitter_rng = jitter_rng

        self.runs_ocean = cfg.mode != "defenseless" and profile.runs_ocean
        self.ranker = RouteRanker(node_id, cfg.ranker_params()) if self.runs_ocean else None

        pessimistic_economy = cfg.economy and cfg.chip_scheme == "pessimistic"
        needs_watch = self.runs_ocean or pessimistic_economy
        self.watch = NeighborWatch(node_id, cfg.watch_timeout_us) if needs_watch else None

        self.router = SourceRouter(
            node_id,
            ranker=self.ranker,
            cache_lifetime_us=to_us(cfg.route_cache_lifetime),
            hop_limit=cfg.hop_limit,
        )
        self.ledger = (
            ChipLedger(
                node_id,
                scheme=cfg.chip_scheme,
                car=cfg.car,
                spend_threshold=cfg.spend_threshold,
                initial_balance=cfg.initial_balance,
                ceiling=cfg.chip_ceiling,
            )
            if cfg.economy
            else None
        )
        self.alarms = AlarmRelay(node_id, self.ranker) if cfg.mode == "sechand" and self.ranker else None

        self._send_buffer: dict[NodeId, deque[PendingData]] = {}
        self._discovery: dict[NodeId, int] = {}  # dst -> current attempt
        self._data_seq = 0

    @property
    def metrics(self):
        return self.sim.metrics

    def refresh(self, now: SimTime) -> None:
        """Apply second chances that came due since the last handler ran."""
        if self.ranker is None:
            return
        reinstated = self.ranker.second_chance_sweep(now)
        if reinstated and self.alarms:
            self.alarms.forget(reinstated)

    # ============================================
    # Reception
    # ============================================

    def wants(self, packet: PacketBase, transmitter: NodeId, addressed: bool) -> bool:
        """False when receiving `packet` from `transmitter` cannot change this node's state."""
        if isinstance(packet, DataPacket):
            if addressed:
                return True
            # Only the hop before the transmitter holds a matching checksum
            index = packet.index
            return self.watch is not None and index >= 2 and packet.route[index - 2] == self.id
        if isinstance(packet, RouteRequest):
            return not self.router.is_stale_rreq(packet)
        if isinstance(packet, RouteError):
            return addressed or (packet.alarm is not None and self.alarms is not None)
        return addressed

    def receive(self, packet: PacketBase, transmitter: NodeId, addressed: bool, now: SimTime) -> None:
        self.refresh(now)
        if isinstance(packet, DataPacket):
            self._on_data(packet, transmitter, addressed, now)
        elif isinstance(packet, RouteRequest):
            self._on_rreq(packet, now)
        elif isinstance(packet, RouteReply):
            if addressed:
                self._on_rrep(packet, now)
        elif isinstance(packet, RouteError):
            self._on_rerr(packet, addressed, now)

    def _on_rreq(self, packet: RouteRequest, now: SimTime) -> None:
        verdict = decide_rreq(self.profile, packet, self.id)
        if verdict == "silent_drop":
            return

        rushing = verdict == "rush_tampered"
        if rushing:
            packet = tamper_avoid_list(self.profile, packet, self.id)

        decision = self.router.handle_rreq(packet, now)
        if decision.action == "suppress":
            if decision.reason == "malformed":
                self.metrics.protocol_error()
            return

        if decision.action == "reply":
            reply = decision.packet
            self._send_along(reply, reply.route, reply.index - 1)
            return

        onward = decision.packet
        if rushing:
            onward = pad_route_record(
                self.profile, onward, self.sim.neighbors_of(self.id), phantom_base=self.cfg.num_nodes
            )
            self.sim.transmit(self.id, onward)
            return

        jitter_ms = self._jitter_rng.uniform(self.cfg.rreq_jitter_min_ms, self.cfg.rreq_jitter_max_ms)
        delay = int(round(jitter_ms * MILLISECOND))
        if delay <= 0:
            self.sim.transmit(self.id, onward)
        else:
            self.sim.schedule(now + delay, self.sim.transmit, self.id, onward)

    def _on_rrep(self, packet: RouteReply, now: SimTime) -> None:
        decision = self.router.handle_rrep(packet, now)
        if decision.action == "accept_route":
            self._route_found(packet.route[-1], now)
        elif decision.action == "relay":
            self.sim.transmit(self.id, decision.packet, decision.next_hop)

    def _on_rerr(self, packet: RouteError, addressed: bool, now: SimTime) -> None:
        if packet.alarm is not None and self.alarms:
            self.alarms.on_overhear_alarm(packet, now)
        if not addressed:
            return
        onward = self.router.handle_rerr(packet)
        if onward is not None:
            self.sim.transmit(self.id, onward[0], onward[1])

    def _on_data(self, packet: DataPacket, transmitter: NodeId, addressed: bool, now: SimTime) -> None:
        if not addressed:
            if self.watch is not None:
                event = self.watch.on_overhear(packet, transmitter, now)
                if event is not None:
                    self._observe(event)
            return

        metrics = self.metrics
        if decide_data_forward(self.profile, packet, self.id) == "silent_drop":
            metrics.drop(packet.uid, "dropped_misbehavior")
            return

        decision = self.router.forward_data(packet, transmitter)
        if decision.action == "deliver":
            metrics.deliver(packet.uid)
        elif decision.action == "protocol_error":
            metrics.protocol_error()
            metrics.drop(packet.uid, "dropped_protocol_error")
        elif decision.action == "reject_malicious":
            metrics.reject(self.id)
            metrics.drop(packet.uid, "dropped_rejected")
        elif decision.action == "drop_no_route":
            metrics.drop(packet.uid, "dropped_no_route")
            self._report_faulty_next_hop(packet, decision.next_hop)
        else:
            if self.ledger is not None and self.ledger.admit_forward(transmitter, now) == "deny":
                metrics.deny(self.id)
                metrics.drop(packet.uid, "dropped_economy")
                return
            self.sim.transmit(self.id, decision.packet, decision.next_hop)

    # ============================================
    # Transmission outcomes
    # ============================================

    def on_tx_done(self, packet: PacketBase, to: NodeId, success: bool, now: SimTime) -> None:
        self.refresh(now)
        if isinstance(packet, DataPacket):
            if success:
                self._after_handoff(packet, to, now)
            else:
                self.metrics.drop(packet.uid, "dropped_link_loss")
                self._broken_link(packet, to, now)
        elif not success:
            self.router.cache.remove_link(self.id, to)

    def _after_handoff(self, packet: DataPacket, to: NodeId, now: SimTime) -> None:
        if self.watch is not None:
            entry = self.watch.on_handoff(packet, to, now)
            if entry is not None:
                self.sim.schedule(entry.deadline, self._watch_deadline)
        if self.ledger is not None and self.ledger.scheme == "optimistic":
            self.ledger.credit_on_accept(to, now)

    def _watch_deadline(self) -> None:
        for event in self.watch.expire(self.sim.now):
            self._observe(event)

    def _broken_link(self, packet: DataPacket, failed_next: NodeId, now: SimTime) -> None:
        rerr = self.router.handle_broken_link(packet, failed_next, now)
        if rerr is None:
            return
        if self.alarms and self.ranker.is_faulty(failed_next) and self.alarms.should_alarm(failed_next):
            rerr = self.alarms.emit_alarm(failed_next, rerr)
        self._send_rerr(rerr)

    def _report_faulty_next_hop(self, packet: DataPacket, next_hop: NodeId) -> None:
        position = packet.route.index(self.id)
        self.router.cache.remove_link(self.id, next_hop)
        if position == 0:
            return
        rerr = self.router.route_error_toward(packet.route[: position + 1], (self.id, next_hop))
        if self.alarms and self.alarms.should_alarm(next_hop):
            rerr = self.alarms.emit_alarm(next_hop, rerr)
        self._send_rerr(rerr)

    def _send_rerr(self, rerr: RouteError) -> None:
        if len(rerr.return_route) < 2:
            return
        if rerr.alarm is not None:
            self.metrics.alarms += 1
        self._send_along(rerr, rerr.return_route, 1)

    def _send_along(self, packet: RouteReply | RouteError, route: tuple[NodeId, ...], index: int) -> None:
        """Hand a route-carrying control packet to `route[index]`."""
        self.sim.transmit(self.id, packet.model_copy(update={"index": index}), route[index])

    # ============================================
    # Observations
    # ============================================

    def _observe(self, event: ObservationEvent) -> None:
        if event.sign == "positive" and self.ledger is not None and self.ledger.scheme == "pessimistic":
            self.ledger.credit_on_observed_forward(event.subject, event.time)
        if self.ranker is None:
            return

        self.refresh(event.time)
        transition = self.ranker.apply_event(event)
        if transition == "became_faulty":
            self._report_detection(event)

    def _report_detection(self, event: ObservationEvent) -> None:
        """
        Treat the link to a neighbor that just became faulty as broken.

        A relay sends a RERR for the link back toward the source of the
        observed packet at once; a source only purges its cache. In SEC-HAND
        mode the RERR carries the alarm.
        """
        subject = event.subject
        self.router.cache.remove_link(self.id, subject)
        route = event.packet_route
        if self.id not in route:
            return
        position = route.index(self.id)
        if position == 0:
            return
        rerr = self.router.route_error_toward(route[: position + 1], (self.id, subject))
        if self.alarms and self.alarms.should_alarm(subject):
            rerr = self.alarms.emit_alarm(subject, rerr)
        self._send_rerr(rerr)

    # ============================================
    # Origination and discovery
    # ============================================

    def originate_data(self, dst: NodeId, now: SimTime) -> int:
        """Create one DATA packet for `dst`; returns its uid."""
        self.refresh(now)
        uid = self.metrics.originate(self.id)
        pending = PendingData(uid=uid, seq=self._data_seq, created_at=now)
        self._data_seq += 1

        route = self.router.select_route(dst, now)
        if route is not None:
            self._send_data(dst, pending, route, now)
            return uid

        self._send_buffer.setdefault(dst, deque()).append(pending)
        self.sim.schedule(now + to_us(self.cfg.send_buffer_timeout), self._expire_buffered, dst, uid)
        self.request_route(dst, now)
        return uid

    def _send_data(self, dst: NodeId, pending: PendingData, route: tuple[NodeId, ...], now: SimTime) -> None:
        packet = DataPacket(
            src=self.id,
            dst=dst,
            seq=pending.seq,
            route=route,
            index=0,
            payload_size=self.cfg.payload_size,
            uid=pending.uid,
            created_at=pending.created_at,
        )
        decision = self.router.forward_data(packet, None)
        if decision.action == "forward":
            self.sim.transmit(self.id, decision.packet, decision.next_hop)
        elif decision.action == "drop_no_route":
            self.metrics.drop(pending.uid, "dropped_no_route")
        else:
            self.metrics.protocol_error()
            self.metrics.drop(pending.uid, "dropped_protocol_error")

    def _expire_buffered(self, dst: NodeId, uid: int) -> None:
        buffered = self._send_buffer.get(dst)
        if not buffered:
            return
        for pending in buffered:
            if pending.uid == uid:
                buffered.remove(pending)
                self.metrics.drop(uid, "dropped_no_route")
                return

    def request_route(self, dst: NodeId, now: SimTime) -> None:
        if dst in self._discovery:
            return
        self._discovery_attempt(dst, 1, now)

    def _discovery_attempt(self, dst: NodeId, attempt: int, now: SimTime) -> None:
        self._discovery[dst] = attempt
        self.sim.transmit(self.id, self.router.originate_rreq(dst, now))
        wait = to_us(self.cfg.discovery_timeout) * 2 ** (attempt - 1)
        self.sim.schedule(now + wait, self._discovery_timeout, dst, attempt)

    def _discovery_timeout(self, dst: NodeId, attempt: int) -> None:
        now = self.sim.now
        if self._discovery.get(dst) != attempt:
            return
        self.refresh(now)
        if self.router.select_route(dst, now) is not None:
            self._route_found(dst, now)
            return
        if attempt < self.cfg.max_discovery_attempts:
            self._discovery_attempt(dst, attempt + 1, now)
            return

        del self._discovery[dst]
        for pending in self._send_buffer.pop(dst, deque()):
            self.metrics.drop(pending.uid, "dropped_no_route")
        logger.debug("node %s gave up discovering %s", self.id, dst)

    def _route_found(self, dst: NodeId, now: SimTime) -> None:
        self._discovery.pop(dst, None)
        buffered = self._send_buffer.pop(dst, None)
        if not buffered:
            return
        route = self.router.select_route(dst, now)
        if route is None:
            self._send_buffer[dst] = buffered
            return
        for pending in buffered:
            self._send_data(dst, pending, route, now)
