# app/core/traffic.py

"""
Constant-bitrate connections.

A fixed number of connection slots tick at the source rate, staggered
across one packet interval. An empty slot opens a connection between a
random pair whose current hop distance is at least `min_connection_hops`;
the connection sends `packets_per_connection` packets and frees the slot.
Pinned connections reopen on the same pair forever.
"""

import logging
from typing import TYPE_CHECKING, Optional

import numpy as np
from pydantic import BaseModel
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from app.models.packet import NodeId, SimTime

if TYPE_CHECKING:
    from app.core.engine import Simulator

logger = logging.getLogger(__name__)


class CbrConnection(BaseModel):
    slot: int
    src: NodeId
    dst: NodeId
    opened_at: SimTime
    sent: int = 0


class TrafficGenerator:
    """Keeps the configured connection slots busy."""

    def __init__(self, sim: "Simulator", rng: np.random.Generator):
        self.sim = sim
        self.cfg = sim.cfg
        self.rng = rng
        self.pinned = self.cfg.connections
        slots = len(self.pinned) if self.pinned is not None else self.cfg.concurrent_connections
        self.active: list[Optional[CbrConnection]] = [None] * slots
        self.history: list[CbrConnection] = []

    def start(self) -> None:
        interval = self.cfg.packet_interval_us
        slots = len(self.active)
        for slot in range(slots):
            self.sim.schedule((slot * interval) // slots, self._tick, slot)

    def _tick(self, slot: int) -> None:
        self.generate_traffic(self.sim.now, slot)
        self.sim.schedule(self.sim.now + self.cfg.packet_interval_us, self._tick, slot)

    def generate_traffic(self, now: SimTime, slot: int = 0) -> None:
        """Send the slot's next packet, opening a connection first if needed."""
        connection = self.active[slot]
        if connection is None:
            connection = self._open(slot, now)
            if connection is None:
                self.sim.metrics.connection_retries += 1
                return
            self.active[slot] = connection

        self.sim.nodes[connection.src].originate_data(connection.dst, now)
        connection.sent += 1
        if connection.sent >= self.cfg.packets_per_connection:
            self.active[slot] = None

    def _open(self, slot: int, now: SimTime) -> Optional[CbrConnection]:
        if self.pinned is not None:
            src, dst = self.pinned[slot]
        else:
            pair = self.pick_pair(now)
            if pair is None:
                return None
            src, dst = pair

        connection = CbrConnection(slot=slot, src=src, dst=dst, opened_at=now)
        self.history.append(connection)
        self.sim.metrics.connections_opened += 1
        return connection

    def eligible_pairs(self, now: SimTime) -> list[tuple[NodeId, NodeId]]:
        """Ordered pairs at least `min_connection_hops` apart at `now`, ascending."""
        adjacency = self.sim.radio.adjacency(self.sim.mobility.positions(now))
        hops = shortest_path(csr_matrix(adjacency), directed=False, unweighted=True)
        eligible = np.isfinite(hops) & (hops >= self.cfg.min_connection_hops)
        np.fill_diagonal(eligible, False)
        return [(int(src), int(dst)) for src, dst in np.argwhere(eligible)]

    def pick_pair(self, now: SimTime) -> Optional[tuple[NodeId, NodeId]]:
        pairs = self.eligible_pairs(now)
        if not pairs:
            return None
        return pairs[int(self.rng.integers(len(pairs)))]
