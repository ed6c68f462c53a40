# app/core/accounting.py

"""
Per-run metric collection.

Every originated DATA packet is tracked by uid until it is delivered or
dropped for exactly one cause; whatever is still outstanding when the run
ends is reported as in flight. A second terminal outcome for the same uid is
a protocol error, not a double count.
"""

import logging
from collections import Counter

from app.models.metrics import DROP_CAUSES, NODE_CLASSES, ClassMetrics, DropCause, RunMetrics
from app.models.packet import NodeId

logger = logging.getLogger(__name__)


class MetricsCollector:
    """Accumulates the outcome of one simulation run."""

    def __init__(self, node_classes: list[str]):
        self.node_classes = node_classes
        self.outstanding: dict[int, NodeId] = {}  # uid -> source
        self.originated_by: Counter[NodeId] = Counter()
        self.delivered_by: Counter[NodeId] = Counter()
        self.drops: Counter[str] = Counter()
        self.rejected_by_node: Counter[NodeId] = Counter()
        self.denied_by_node: Counter[NodeId] = Counter()
        self.control_packets: Counter[str] = Counter()
        self.faulty_series: list[tuple[float, float]] = []
        self.alarms = 0
        self.protocol_errors = 0
        self.connection_retries = 0
        self.connections_opened = 0
        self._next_uid = 0

    # ============================================
    # Packet lifecycle
    # ============================================

    def originate(self, source: NodeId) -> int:
        uid = self._next_uid
        self._next_uid += 1
        self.outstanding[uid] = source
        self.originated_by[source] += 1
        return uid

    def deliver(self, uid: int) -> None:
        source = self.outstanding.pop(uid, None)
        if source is None:
            self.protocol_errors += 1
            return
        self.delivered_by[source] += 1

    def drop(self, uid: int, cause: DropCause) -> None:
        if uid not in self.outstanding:
            self.protocol_errors += 1
            return
        del self.outstanding[uid]
        self.drops[cause] += 1

    def is_outstanding(self, uid: int) -> bool:
        return uid in self.outstanding

    # ============================================
    # Counters
    # ============================================

    def reject(self, node: NodeId) -> None:
        self.rejected_by_node[node] += 1

    def deny(self, node: NodeId) -> None:
        self.denied_by_node[node] += 1

    def control(self, kind: str) -> None:
        self.control_packets[kind] += 1

    def protocol_error(self) -> None:
        self.protocol_errors += 1

    def sample_faulty(self, time_s: float, mean_size: float) -> None:
        self.faulty_series.append((time_s, mean_size))

    # ============================================
    # Result
    # ============================================

    def finalize(self, seed: int, mode: str, sim_duration: float) -> RunMetrics:
        classes = {name: ClassMetrics() for name in NODE_CLASSES}
        for node, name in enumerate(self.node_classes):
            stats = classes[name]
            classes[name] = ClassMetrics(
                nodes=stats.nodes + 1,
                originated=stats.originated + self.originated_by[node],
                delivered=stats.delivered + self.delivered_by[node],
            )

        metrics = RunMetrics(
            seed=seed,
            mode=mode,
            sim_duration=sim_duration,
            originated=sum(self.originated_by.values()),
            delivered=sum(self.delivered_by.values()),
            in_flight=len(self.outstanding),
            drops={cause: self.drops[cause] for cause in DROP_CAUSES},
            classes=classes,
            rejected_by_node=dict(sorted(self.rejected_by_node.items())),
            denied_by_node=dict(sorted(self.denied_by_node.items())),
            faulty_series=list(self.faulty_series),
            alarms=self.alarms,
            protocol_errors=self.protocol_errors,
            connection_retries=self.connection_retries,
            connections_opened=self.connections_opened,
            control_packets=dict(sorted(self.control_packets.items())),
        )
        if metrics.accounted() != metrics.originated:
            logger.error(
                "accounting mismatch: originated=%d accounted=%d", metrics.originated, metrics.accounted()
            )
        return metrics
