# app/core/radio.py

"""
Unit-disk radio and airtime.

Two nodes hear each other iff their distance is at most the radio range,
so reception is symmetric. Airtime is the packet's bits over the raw
bandwidth plus a fixed per-hop overhead, or a single uniform value when
the scenario pins one.
"""

import networkx as nx
import numpy as np

from app.models.packet import SECOND, NodeId, PacketBase, packet_size_bytes
from app.models.scenario import ScenarioConfig


def airtime_us(size_bytes: int, bandwidth_bps: int, overhead_us: int = 0) -> int:
    return (size_bytes * 8 * SECOND) // bandwidth_bps + overhead_us


class Radio:
    """Range checks and transmission timing for one scenario."""

    def __init__(self, cfg: ScenarioConfig):
        self.radio_range = cfg.radio_range
        self.bandwidth = cfg.raw_bandwidth
        self.header_bytes = cfg.header_bytes
        self.overhead_us = cfg.per_hop_overhead_us
        self.uniform_tx_time_us = cfg.uniform_tx_time_us

    def tx_time(self, packet: PacketBase) -> int:
        if self.uniform_tx_time_us is not None:
            return self.uniform_tx_time_us
        size = packet_size_bytes(packet, self.header_bytes)
        return airtime_us(size, self.bandwidth, self.overhead_us)

    def distances_from(self, positions: np.ndarray, sender: NodeId) -> np.ndarray:
        return np.hypot(*(positions - positions[sender]).T)

    def in_range(self, positions: np.ndarray, sender: NodeId) -> list[NodeId]:
        """Receivers of `sender` in ascending id order."""
        within = self.distances_from(positions, sender) <= self.radio_range
        within[sender] = False
        return [int(n) for n in np.flatnonzero(within)]

    def adjacency(self, positions: np.ndarray) -> np.ndarray:
        """Symmetric boolean in-range matrix with an empty diagonal."""
        deltas = positions[:, None, :] - positions[None, :, :]
        within = np.hypot(deltas[..., 0], deltas[..., 1]) <= self.radio_range
        np.fill_diagonal(within, False)
        return within

    def connectivity_graph(self, positions: np.ndarray) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(len(positions)))
        rows, cols = np.nonzero(np.triu(self.adjacency(positions), k=1))
        graph.add_edges_from(zip(rows.tolist(), cols.tolist()))
        return graph
