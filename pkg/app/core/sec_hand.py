# app/core/sec_hand.py

"""
Second-hand reputation carried in route errors.

A node that locally marks a neighbor faulty advertises it once per faulty
episode in the alarm field of a RERR travelling back toward the traffic
source. Every node that receives or overhears such a RERR adds the accused
node to its own faulty list.
"""

import logging

from app.core.errors import ContractViolation
from app.core.route_ranker import RouteRanker
from app.models.packet import NodeId, RouteError, SimTime

logger = logging.getLogger(__name__)


class AlarmRelay:
    """Alarm bookkeeping for one node in SEC-HAND mode."""

    def __init__(self, owner: NodeId, ranker: RouteRanker):
        self.owner = owner
        self.ranker = ranker
        self._alarmed: set[NodeId] = set()  # accused in the current faulty episode
        self.emitted = 0
        self.adopted = 0

    def should_alarm(self, accused: NodeId) -> bool:
        return accused not in self._alarmed and accused != self.owner

    def emit_alarm(self, accused: NodeId, rerr: RouteError) -> RouteError:
        """Return `rerr` carrying `accused` in its alarm field."""
        if accused == self.owner:
            raise ContractViolation("a node cannot raise an alarm against itself")
        self._alarmed.add(accused)
        self.emitted += 1
        logger.debug("node %s raises alarm against %s", self.owner, accused)
        return rerr.model_copy(update={"alarm": accused})

    def on_overhear_alarm(self, packet: RouteError, now: SimTime) -> bool:
        """Adopt the accusation; True when the accused was not already faulty."""
        accused = packet.alarm
        if accused is None or accused == self.owner:
            return False
        newly = self.ranker.mark_faulty(accused, now)
        if newly:
            self.adopted += 1
            logger.debug(
                "node %s adopts alarm from %s against %s", self.owner, packet.src, accused
            )
        return newly

    def forget(self, reinstated: list[NodeId]) -> None:
        """Start a new episode for nodes given a second chance."""
        self._alarmed.difference_update(reinstated)
