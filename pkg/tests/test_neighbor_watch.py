# tests/test_neighbor_watch.py

"""
Tests for the overhearing checksum buffer.
"""

import pytest

from app.core.neighbor_watch import NeighborWatch
from app.models.packet import DataPacket, RouteRequest


# ============================================
# Test Data
# ============================================

def make_data(index: int = 1, seq: int = 0) -> DataPacket:
    return DataPacket(src=0, dst=3, seq=seq, route=(0, 1, 2, 3), index=index)


def make_watch(timeout_us: int = 1000) -> NeighborWatch:
    return NeighborWatch(owner=0, timeout_us=timeout_us)


# ============================================
# Handoff Tests
# ============================================

class TestHandoff:
    """Entries are created for every hop except the final one."""

    def test_handoff_creates_entry_with_deadline(self):
        watch = make_watch()

        entry = watch.on_handoff(make_data(), next_hop=1, now=100)

        assert entry is not None
        assert entry.neighbor == 1
        assert entry.deadline == 1100
        assert len(watch) == 1

    def test_no_entry_when_next_hop_is_destination(self):
        watch = make_watch()

        assert watch.on_handoff(make_data(index=3), next_hop=3, now=0) is None
        assert len(watch) == 0


# ============================================
# Overhearing Tests
# ============================================

class TestOverhear:
    """Positive observations come from hearing the neighbor forward."""

    def test_forward_before_deadline_is_positive(self):
        watch = make_watch()
        watch.on_handoff(make_data(index=1), next_hop=1, now=100)

        event = watch.on_overhear(make_data(index=2), transmitter=1, now=600)

        assert event is not None
        assert event.sign == "positive"
        assert event.subject == 1
        assert event.time == 600
        assert event.packet_route == (0, 1, 2, 3)
        assert len(watch) == 0
        assert watch.positives == 1

    def test_forward_at_deadline_still_counts(self):
        watch = make_watch()
        watch.on_handoff(make_data(), next_hop=1, now=0)

        assert watch.on_overhear(make_data(index=2), transmitter=1, now=1000) is not None

    def test_other_transmitter_does_not_match(self):
        watch = make_watch()
        watch.on_handoff(make_data(), next_hop=1, now=0)

        assert watch.on_overhear(make_data(index=2), transmitter=2, now=10) is None
        assert len(watch) == 1

    def test_other_packet_does_not_match(self):
        watch = make_watch()
        watch.on_handoff(make_data(seq=0), next_hop=1, now=0)

        assert watch.on_overhear(make_data(index=2, seq=1), transmitter=1, now=10) is None

    def test_control_packets_are_ignored(self):
        watch = make_watch()
        watch.on_handoff(make_data(), next_hop=1, now=0)
        rreq = RouteRequest(src=1, dst=5, seq=0, route_record=(1,))

        assert watch.on_overhear(rreq, transmitter=1, now=10) is None

    def test_late_forward_does_not_cancel_negative(self):
        watch = make_watch()
        watch.on_handoff(make_data(), next_hop=1, now=0)

        assert watch.on_overhear(make_data(index=2), transmitter=1, now=1001) is None
        events = watch.expire(1001)
        assert [event.sign for event in events] == ["negative"]


# ============================================
# Expiry Tests
# ============================================

class TestExpire:
    """Deadlines produce negatives timed at the deadline."""

    def test_expire_is_inclusive_of_deadline(self):
        watch = make_watch()
        watch.on_handoff(make_data(), next_hop=1, now=0)

        assert watch.expire(999) == []
        events = watch.expire(1000)

        assert len(events) == 1
        assert events[0].sign == "negative"
        assert events[0].time == 1000
        assert watch.negatives == 1

    def test_expire_in_deadline_order(self):
        watch = make_watch()
        watch.on_handoff(make_data(seq=0), next_hop=1, now=0)
        watch.on_handoff(make_data(seq=1), next_hop=1, now=200)
        watch.on_handoff(make_data(seq=2), next_hop=1, now=5000)

        events = watch.expire(1500)

        assert [event.time for event in events] == [1000, 1200]
        assert watch.next_deadline() == 6000

    def test_matched_entries_are_skipped_by_expiry(self):
        watch = make_watch()
        watch.on_handoff(make_data(seq=0), next_hop=1, now=0)
        watch.on_handoff(make_data(seq=1), next_hop=1, now=0)
        watch.on_overhear(make_data(index=2, seq=0), transmitter=1, now=10)

        events = watch.expire(2000)

        assert len(events) == 1
        assert watch.created == 2


# ============================================
# Run Tests
# ============================================

if __name__ == "__main__":
    pytest.main([__file__, "-v"])
