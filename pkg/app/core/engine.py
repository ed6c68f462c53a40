# app/core/engine.py

"""
Discrete-event core.

A single-threaded loop pops (time, sequence) ordered callbacks from a heap.
The radio is a unit disk and the MAC a per-node FIFO of serialized
transmissions: every node in range when a transmission starts receives it
one airtime later, receivers in ascending id order, and unicast attempts
are repeated up to the retransmit budget when the addressee misses them.
Copies a receiver would ignore (duplicate requests, overheard data nobody
is watching for) are not scheduled; the trace still counts every node in
range.
"""

import heapq
import itertools
import logging
from collections import deque
from typing import Any, Callable, Optional

import numpy as np

from app.core.accounting import MetricsCollector
from app.core.behavior import assign_profiles
from app.core.errors import ContractViolation
from app.core.mobility import RandomWaypoint
from app.core.node import Node
from app.core.radio import Radio
from app.core.traffic import TrafficGenerator
from app.models.metrics import RunMetrics
from app.models.packet import NodeId, PacketBase, SimTime, seconds, to_us
from app.models.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


# ============================================
# Event queue
# ============================================

class EventQueue:
    """
    Heap of callbacks ordered by time, then insertion sequence.

    Scheduling before the last popped time is a caller bug; events beyond
    the horizon are silently discarded since they cannot affect the run.
    """

    def __init__(self, horizon: Optional[SimTime] = None):
        self._heap: list[tuple[SimTime, int, Callable[..., Any], tuple]] = []
        self._sequence = itertools.count()
        self.horizon = horizon
        self.lo_time: SimTime = 0

    def push(self, time: SimTime, callback: Callable[..., Any], *args: Any) -> None:
        if time < self.lo_time:
            raise ContractViolation(f"event at t={time}us scheduled after t={self.lo_time}us")
        if self.horizon is not None and time > self.horizon:
            return
        heapq.heappush(self._heap, (time, next(self._sequence), callback, args))

    def pop(self) -> tuple[SimTime, Callable[..., Any], tuple]:
        time, _, callback, args = heapq.heappop(self._heap)
        self.lo_time = time
        return time, callback, args

    def peek_time(self) -> Optional[SimTime]:
        return self._heap[0][0] if self._heap else None

    def __len__(self) -> int:
        return len(self._heap)


# ============================================
# Simulator
# ============================================

class Simulator:
    """One isolated run of a scenario."""

    def __init__(self, cfg: ScenarioConfig, trace: bool = False):
        self.cfg = cfg
        self.now: SimTime = 0
        self.queue = EventQueue(horizon=cfg.duration_us)

        n = cfg.num_nodes
        root = np.random.SeedSequence(cfg.seed)
        placement_seq, traffic_seq, loss_seq, mobility_seq, jitter_seq = root.spawn(5)
        mobility_streams = [np.random.default_rng(s) for s in mobility_seq.spawn(n)]
        jitter_streams = [np.random.default_rng(s) for s in jitter_seq.spawn(n)]
        self._loss_rng = np.random.default_rng(loss_seq)

        self.radio = Radio(cfg)
        self.mobility = RandomWaypoint(cfg, mobility_streams)
        self.profiles = assign_profiles(cfg, np.random.default_rng(placement_seq))
        self.metrics = MetricsCollector([profile.kind for profile in self.profiles])
        self.nodes = [Node(i, self, self.profiles[i], jitter_streams[i]) for i in range(n)]
        self.traffic = TrafficGenerator(self, np.random.default_rng(traffic_seq))

        self._mac_queues: list[deque[tuple[PacketBase, Optional[NodeId], int]]] = [
            deque() for _ in range(n)
        ]
        self._busy = [False] * n
        self.trace: Optional[list[dict[str, Any]]] = [] if trace else None
        self._started = False

    def schedule(self, at: SimTime, callback: Callable[..., Any], *args: Any) -> None:
        self.queue.push(at, callback, *args)

    # ============================================
    # Radio and MAC
    # ============================================

    def neighbors_of(self, node: NodeId) -> list[NodeId]:
        return self.radio.in_range(self.mobility.positions(self.now), node)

    def transmit(self, sender: NodeId, packet: PacketBase, unicast_to: Optional[NodeId] = None) -> None:
        """Queue `packet` at the sender's MAC; broadcast when `unicast_to` is None."""
        self._mac_queues[sender].append((packet, unicast_to, 1))
        if not self._busy[sender]:
            self._start_next(sender)

    def _start_next(self, sender: NodeId) -> None:
        queue = self._mac_queues[sender]
        if not queue:
            self._busy[sender] = False
            return

        packet, unicast_to, attempt = queue.popleft()
        self._busy[sender] = True

        receivers = self.radio.in_range(self.mobility.positions(self.now), sender)
        arrival = self.now + self.radio.tx_time(packet)
        loss = self.cfg.link_loss_prob
        reached_addressee = False

        for receiver in receivers:
            if loss > 0 and self._loss_rng.random() < loss:
                continue
            if receiver == unicast_to:
                reached_addressee = True
            addressed = unicast_to is None or unicast_to == receiver
            if self.nodes[receiver].wants(packet, sender, addressed):
                self.schedule(arrival, self._deliver, receiver, packet, sender, addressed)

        success = unicast_to is None or reached_addressee
        if attempt == 1 and packet.kind != "DATA":
            self.metrics.control(packet.kind)
        if self.trace is not None:
            self._record(packet, sender, unicast_to, attempt, len(receivers))
        self.schedule(arrival, self._tx_done, sender, packet, unicast_to, attempt, success)

    def _deliver(self, receiver: NodeId, packet: PacketBase, sender: NodeId, addressed: bool) -> None:
        self.nodes[receiver].receive(packet, sender, addressed, self.now)

    def _tx_done(
        self,
        sender: NodeId,
        packet: PacketBase,
        unicast_to: Optional[NodeId],
        attempt: int,
        success: bool,
    ) -> None:
        if not success and attempt < self.cfg.mac_retransmit_budget:
            self._mac_queues[sender].appendleft((packet, unicast_to, attempt + 1))
        elif unicast_to is not None:
            self.nodes[sender].on_tx_done(packet, unicast_to, success, self.now)
        self._start_next(sender)

    def _record(
        self, packet: PacketBase, sender: NodeId, unicast_to: Optional[NodeId], attempt: int, heard_by: int
    ) -> None:
        entry: dict[str, Any] = {
            "t_us": self.now,
            "sender": sender,
            "to": unicast_to,
            "attempt": attempt,
            "heard_by": heard_by,
            "kind": packet.kind,
            "src": packet.src,
            "dst": packet.dst,
            "seq": packet.seq,
        }
        if packet.kind == "RERR":
            entry["alarm"] = packet.alarm
        if packet.kind == "DATA":
            entry["uid"] = packet.uid
        self.trace.append(entry)

    # ============================================
    # Sampling
    # ============================================

    def _sample(self, interval_us: SimTime) -> None:
        sizes = []
        for node in self.nodes:
            if node.ranker is None:
                continue
            node.refresh(self.now)
            sizes.append(len(node.ranker.faulty_list()))
        mean = sum(sizes) / len(sizes) if sizes else 0.0
        self.metrics.sample_faulty(seconds(self.now), mean)
        self.schedule(self.now + interval_us, self._sample, interval_us)

    # ============================================
    # Run loop
    # ============================================

    def start(self) -> None:
        if self._started:
            return
        self._started = True
        self.traffic.start()
        interval_us = to_us(self.cfg.sample_interval)
        self.schedule(interval_us, self._sample, interval_us)

    def run_until(self, end: SimTime) -> None:
        self.start()
        while self.queue:
            next_time = self.queue.peek_time()
            if next_time > end:
                break
            self.now, callback, args = self.queue.pop()
            callback(*args)
        self.now = max(self.now, end)

    def run(self) -> RunMetrics:
        cfg = self.cfg
        logger.info(
            "scenario start: seed=%d mode=%s nodes=%d duration=%.1fs",
            cfg.seed, cfg.mode, cfg.num_nodes, cfg.sim_duration,
        )
        self.run_until(cfg.duration_us)
        metrics = self.metrics.finalize(cfg.seed, cfg.mode, cfg.sim_duration)
        logger.info(
            "scenario done: seed=%d mode=%s delivered %d/%d (cooperating ratio %.3f)",
            cfg.seed, cfg.mode, metrics.delivered, metrics.originated,
            metrics.classes["cooperating"].delivery_ratio,
        )
        return metrics
