# app/core/neighbor_watch.py

"""
Passive overhearing monitor.

After handing a DATA packet to a neighbor that is not the packet's
destination, a node buffers the packet's checksum and listens. Hearing the
neighbor transmit a packet with the same checksum before the deadline is a
positive observation; reaching the deadline first is a negative one.
"""

import logging
from collections import deque
from typing import Optional

from app.models.observation import ChecksumBufferEntry, ObservationEvent
from app.models.packet import MILLISECOND, DataPacket, NodeId, PacketBase, SimTime, packet_digest

logger = logging.getLogger(__name__)


class NeighborWatch:
    """Checksum buffer of one node."""

    def __init__(self, owner: NodeId, timeout_us: SimTime = MILLISECOND):
        self.owner = owner
        self.timeout_us = timeout_us

        self._entries: dict[int, ChecksumBufferEntry] = {}
        self._deadlines: deque[int] = deque()  # entry ids in deadline order
        self._next_id = 0

        self.created = 0
        self.positives = 0
        self.negatives = 0

    def __len__(self) -> int:
        return len(self._entries)

    def pending(self) -> list[ChecksumBufferEntry]:
        return list(self._entries.values())

    # ============================================
    # Operations
    # ============================================

    def on_handoff(
        self, packet: DataPacket, next_hop: NodeId, now: SimTime
    ) -> Optional[ChecksumBufferEntry]:
        """Start watching `next_hop` forward `packet`. No entry for the final hop."""
        if next_hop == packet.dst:
            return None

        entry = ChecksumBufferEntry(
            entry_id=self._next_id,
            digest=packet_digest(packet),
            neighbor=next_hop,
            deadline=now + self.timeout_us,
            packet_src=packet.src,
            packet_route=packet.route,
        )
        self._next_id += 1
        self._entries[entry.entry_id] = entry
        self._deadlines.append(entry.entry_id)
        self.created += 1
        return entry

    def on_overhear(
        self, packet: PacketBase, transmitter: NodeId, now: SimTime
    ) -> Optional[ObservationEvent]:
        """Match an overheard transmission against the buffer; one entry at most."""
        if not isinstance(packet, DataPacket) or not self._entries:
            return None

        digest = packet_digest(packet)
        for entry_id, entry in self._entries.items():
            if entry.neighbor != transmitter or entry.digest != digest:
                continue
            if entry.deadline < now:
                # Already late; the expiry sweep reports it
                continue
            del self._entries[entry_id]
            self.positives += 1
            return self._event(entry, "positive", now)
        return None

    def expire(self, now: SimTime) -> list[ObservationEvent]:
        """Remove every entry whose deadline is at or before `now`."""
        events = []
        while self._deadlines:
            entry_id = self._deadlines[0]
            entry = self._entries.get(entry_id)
            if entry is None:
                self._deadlines.popleft()
                continue
            if entry.deadline > now:
                break
            self._deadlines.popleft()
            del self._entries[entry_id]
            self.negatives += 1
            events.append(self._event(entry, "negative", entry.deadline))
        return events

    def next_deadline(self) -> Optional[SimTime]:
        for entry_id in self._deadlines:
            entry = self._entries.get(entry_id)
            if entry is not None:
                return entry.deadline
        return None

    def _event(self, entry: ChecksumBufferEntry, sign: str, time: SimTime) -> ObservationEvent:
        return ObservationEvent(
            observer=self.owner,
            subject=entry.neighbor,
            sign=sign,
            time=time,
            packet_src=entry.packet_src,
            packet_route=entry.packet_route,
        )
