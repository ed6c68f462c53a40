# tests/test_route_ranker.py

"""
Tests for ratings, the faulty list and second chances.
"""

import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError

from app.core.oracles import ranker_matches_replay
from app.core.route_ranker import RouteRanker
from app.models.observation import ObservationEvent, RankerParams
from app.models.packet import SECOND


# ============================================
# Test Data
# ============================================

TIMEOUT = 30 * SECOND


def make_ranker(**params) -> RouteRanker:
    return RouteRanker(owner=0, params=RankerParams(**params))


def observe(ranker: RouteRanker, subject: int, sign: str, time: int = 0):
    return ranker.apply_event(ObservationEvent(observer=0, subject=subject, sign=sign, time=time))


def negatives(ranker: RouteRanker, subject: int, count: int, time: int = 0) -> list:
    return [observe(ranker, subject, "negative", time) for _ in range(count)]


# ============================================
# Rating Tests
# ============================================

class TestRatings:
    """Steps, threshold and floor."""

    def test_unknown_node_is_neutral(self):
        assert make_ranker().rating(7) == 0

    def test_threshold_is_strict(self):
        ranker = make_ranker()

        transitions = negatives(ranker, 5, 20)

        assert ranker.rating(5) == -40
        assert not ranker.is_faulty(5)
        assert all(t is None for t in transitions)

    def test_crossing_threshold_marks_faulty_once(self):
        ranker = make_ranker()
        negatives(ranker, 5, 20)

        assert observe(ranker, 5, "negative") == "became_faulty"
        assert observe(ranker, 5, "negative") is None
        assert ranker.faulty_list() == frozenset({5})

    def test_rating_is_clamped_at_floor(self):
        ranker = make_ranker()

        negatives(ranker, 5, 500)

        assert ranker.rating(5) == -200

    def test_positive_does_not_clear_faulty(self):
        ranker = make_ranker(faulty_threshold=-2)
        negatives(ranker, 5, 2)

        observe(ranker, 5, "positive")
        observe(ranker, 5, "positive")

        assert ranker.rating(5) == -2
        assert ranker.is_faulty(5)

    def test_invalid_params_rejected(self):
        with pytest.raises(ValidationError):
            RankerParams(faulty_threshold=-1, neutral=-5)
        with pytest.raises(ValidationError):
            RankerParams(positive_step=2, negative_step=-2)


# ============================================
# Second Chance Tests
# ============================================

class TestSecondChance:
    """Idle faulty nodes return at the threshold."""

    def test_reinstated_after_timeout_at_threshold(self):
        ranker = make_ranker()
        negatives(ranker, 5, 21, time=1000)

        assert ranker.second_chance_sweep(1000 + TIMEOUT - 1) == []
        assert ranker.second_chance_sweep(1000 + TIMEOUT) == [5]
        assert ranker.rating(5) == -40
        assert not ranker.is_faulty(5)

    def test_one_offence_after_reinstatement_refaults(self):
        ranker = make_ranker()
        negatives(ranker, 5, 21, time=0)
        ranker.second_chance_sweep(TIMEOUT)

        assert observe(ranker, 5, "negative", TIMEOUT + 1) == "became_faulty"

    def test_new_negative_restarts_timeout(self):
        ranker = make_ranker()
        negatives(ranker, 5, 21, time=0)
        observe(ranker, 5, "negative", time=10 * SECOND)

        assert ranker.second_chance_sweep(TIMEOUT) == []
        assert ranker.second_chance_sweep(10 * SECOND + TIMEOUT) == [5]

    def test_reinstated_nodes_returned_in_id_order(self):
        ranker = make_ranker()
        for node in (9, 3, 6):
            negatives(ranker, node, 21)

        assert ranker.second_chance_sweep(TIMEOUT) == [3, 6, 9]


# ============================================
# Accusation Tests
# ============================================

class TestMarkFaulty:
    """Faulty-list entries without local evidence."""

    def test_mark_faulty_pins_rating_and_time(self):
        ranker = make_ranker()

        assert ranker.mark_faulty(4, now=500) is True
        assert ranker.mark_faulty(4, now=600) is False
        assert ranker.rating(4) == -40
        assert ranker.ratings[4].last_event == 600
        assert ranker.ratings[4].accused

    def test_mark_faulty_keeps_lower_rating(self):
        ranker = make_ranker()
        negatives(ranker, 4, 30)

        ranker.mark_faulty(4, now=0)

        assert ranker.rating(4) == -60

    def test_accused_node_gets_second_chance(self):
        ranker = make_ranker()
        ranker.mark_faulty(4, now=SECOND)

        assert ranker.second_chance_sweep(SECOND + TIMEOUT) == [4]
        assert not ranker.ratings[4].accused


# ============================================
# Replay Property
# ============================================

step_strategy = st.one_of(
    st.tuples(st.just("event"), st.integers(1, 3), st.sampled_from(["positive", "negative"]), st.integers(0, 5 * SECOND)),
    st.tuples(st.just("sweep"), st.integers(0, 5 * SECOND)),
)


def with_increasing_time(raw: list) -> list:
    steps, now = [], 0
    for step in raw:
        now += step[-1]
        steps.append((*step[:-1], now))
    return steps


class TestReplayProperty:
    """The ranker agrees with an independent fold over the same log."""

    @settings(max_examples=300, deadline=None)
    @given(st.lists(step_strategy, max_size=150))
    def test_ranker_matches_fold(self, raw):
        params = RankerParams(faulty_threshold=-6, faulty_timeout=8 * SECOND)

        assert ranker_matches_replay(with_increasing_time(raw), params)


# ============================================
# Run Tests
# ============================================

if __name__ == "__main__":
    pytest.main([__file__, "-v"])
