# app/core/route_ranker.py

"""
Neighbor ratings, the faulty list and second chances.

Ratings move by a fixed step per observation and are clamped at a floor of
`floor_factor * faulty_threshold`. A node enters the faulty list when its
rating falls strictly below the threshold and leaves it only through the
second-chance sweep, which restores it at the threshold rather than at
neutral so a single further offence re-faults it.
"""

import logging
from typing import Optional

from app.models.observation import FaultyTransition, NeighborRating, ObservationEvent, RankerParams
from app.models.packet import NodeId, SimTime

logger = logging.getLogger(__name__)


class RouteRanker:
    """Rating table owned by one node."""

    def __init__(self, owner: NodeId, params: Optional[RankerParams] = None):
        self.owner = owner
        self.params = params or RankerParams()
        self.ratings: dict[NodeId, NeighborRating] = {}
        self._faulty: set[NodeId] = set()

    def _entry(self, node: NodeId) -> NeighborRating:
        entry = self.ratings.get(node)
        if entry is None:
            entry = NeighborRating(rating=self.params.neutral)
            self.ratings[node] = entry
        return entry

    # ============================================
    # Observations
    # ============================================

    def apply_event(self, event: ObservationEvent) -> Optional[FaultyTransition]:
        """Fold one observation into the subject's rating."""
        entry = self._entry(event.subject)
        step = self.params.positive_step if event.sign == "positive" else self.params.negative_step
        entry.rating = max(self.params.floor, entry.rating + step)
        entry.last_event = event.time

        if entry.rating < self.params.faulty_threshold and not entry.faulty:
            entry.faulty = True
            self._faulty.add(event.subject)
            logger.debug(
                "node %s marks %s faulty at t=%dus (rating %d)",
                self.owner, event.subject, event.time, entry.rating,
            )
            return "became_faulty"
        return None

    def mark_faulty(self, node: NodeId, now: SimTime) -> bool:
        """
        Put `node` on the faulty list without local evidence.

        The rating is pinned to the threshold and the accusation time becomes
        the last event, so the node is reinstated after one idle timeout.
        Returns True when the node was not already faulty.
        """
        entry = self._entry(node)
        newly = not entry.faulty
        entry.rating = min(entry.rating, self.params.faulty_threshold)
        entry.faulty = True
        entry.accused = entry.accused or newly
        entry.last_event = now
        self._faulty.add(node)
        return newly

    # ============================================
    # Queries
    # ============================================

    def is_faulty(self, node: NodeId) -> bool:
        return node in self._faulty

    def faulty_list(self) -> frozenset[NodeId]:
        return frozenset(self._faulty)

    def rating(self, node: NodeId) -> int:
        entry = self.ratings.get(node)
        return entry.rating if entry else self.params.neutral

    # ============================================
    # Second chance
    # ============================================

    def second_chance_sweep(self, now: SimTime) -> list[NodeId]:
        """Reinstate every faulty node idle for at least `faulty_timeout`."""
        if not self._faulty:
            return []

        reinstated = []
        for node in sorted(self._faulty):
            entry = self.ratings[node]
            if now - entry.last_event >= self.params.faulty_timeout:
                entry.faulty = False
                entry.accused = False
                entry.rating = self.params.faulty_threshold
                reinstated.append(node)

        for node in reinstated:
            self._faulty.discard(node)
        if reinstated:
            logger.debug("node %s gives a second chance to %s", self.owner, reinstated)
        return reinstated
