# tests/test_oracles.py

"""
Tests that cross-check the simulator against the reference computations.
"""

import networkx as nx
import numpy as np
import pytest

from app.core.oracles import (
    FIGURE6_ATTACKER,
    MicroTopology,
    check_micro_topology,
    enumerate_accepted_routes,
    figure6_outcome,
    figure6_routes,
    random_micro_topology,
    random_rating_steps,
    ranker_matches_replay,
    replay_ratings,
    run_oracles,
)
from app.models.observation import RankerParams
from app.models.packet import SECOND


# ============================================
# Test Data
# ============================================

def make_graph(edges: list[tuple[int, int]], count: int) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(count))
    graph.add_edges_from(edges)
    return graph


DIAMOND = make_graph([(0, 1), (0, 2), (1, 3), (2, 3)], 4)


# ============================================
# Rating Replay Tests
# ============================================

class TestReplay:
    """The independent fold itself."""

    def test_fold_threshold_and_floor(self):
        params = RankerParams(faulty_threshold=-4)
        steps = [("event", 1, "negative", t) for t in range(12)]

        state = replay_ratings(steps, params)

        assert state[1] == (-20, True, 11)

    def test_fold_second_chance(self):
        params = RankerParams(faulty_threshold=-2, faulty_timeout=10)
        steps = [
            ("event", 1, "negative", 0),
            ("event", 1, "negative", 1),
            ("sweep", 10),
            ("sweep", 11),
        ]

        assert replay_ratings(steps, params)[1] == (-2, False, 1)

    def test_random_sequences_match_ranker(self):
        rng = np.random.default_rng(0)
        params = RankerParams(faulty_timeout=30 * SECOND)

        for _ in range(200):
            steps = random_rating_steps(rng, int(rng.integers(1, 150)))
            assert ranker_matches_replay(steps, params)


# ============================================
# Route Enumeration Tests
# ============================================

class TestEnumerator:
    """Brute-force accepted routes on hand-built graphs."""

    def test_line(self):
        graph = make_graph([(0, 1), (1, 2)], 3)

        assert enumerate_accepted_routes(graph, 0, 2, {}) == {(0, 1, 2)}

    def test_diamond_both_routes(self):
        assert enumerate_accepted_routes(DIAMOND, 0, 3, {}) == {(0, 1, 3), (0, 2, 3)}

    def test_source_faulty_list_prunes(self):
        routes = enumerate_accepted_routes(DIAMOND, 0, 3, {0: frozenset({2})})

        assert routes == {(0, 1, 3)}

    def test_relay_faulty_list_blocks_reply(self):
        graph = make_graph([(0, 1), (1, 2), (2, 3)], 4)

        assert enumerate_accepted_routes(graph, 0, 3, {1: frozenset({2})}) == set()

    def test_faulty_destination_still_accepted(self):
        graph = make_graph([(0, 1), (1, 2), (2, 3)], 4)

        assert enumerate_accepted_routes(graph, 0, 3, {1: frozenset({3})}) == {(0, 1, 2, 3)}

    def test_direct_neighbor(self):
        graph = make_graph([(0, 1)], 2)

        assert enumerate_accepted_routes(graph, 0, 1, {}) == {(0, 1)}

    def test_second_copy_does_not_propagate(self):
        # 3 first hears (0, 1); its copy via 2 is a duplicate
        graph = make_graph([(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)], 5)

        assert enumerate_accepted_routes(graph, 0, 4, {}) == {(0, 1, 3, 4)}


# ============================================
# Engine Agreement Tests
# ============================================

class TestDiscoveryAgreement:
    """The engine's flood accepts exactly the enumerated routes."""

    def test_diamond_in_engine(self):
        case = MicroTopology(
            positions=[(100.0, 300.0), (300.0, 450.0), (300.0, 150.0), (500.0, 300.0)],
            src=0,
            dst=3,
        )

        expected, actual = check_micro_topology(case)

        assert expected == {(0, 1, 3), (0, 2, 3)}
        assert actual == expected

    def test_diamond_with_faulty_lists_in_engine(self):
        case = MicroTopology(
            positions=[(100.0, 300.0), (300.0, 450.0), (300.0, 150.0), (500.0, 300.0)],
            src=0,
            dst=3,
            faulty={0: frozenset({2})},
        )

        expected, actual = check_micro_topology(case)

        assert actual == expected == {(0, 1, 3)}

    @pytest.mark.parametrize("seed", range(6))
    def test_random_micro_topologies(self, seed):
        rng = np.random.default_rng(seed)

        for _ in range(5):
            case = random_micro_topology(rng)
            expected, actual = check_micro_topology(case)
            assert actual == expected, case.model_dump()

    def test_random_topologies_are_connected(self):
        rng = np.random.default_rng(1)

        for _ in range(10):
            case = random_micro_topology(rng)
            assert 3 <= len(case.positions) <= 6
            assert nx.is_connected(case.graph())


# ============================================
# Rushing Attack Tests
# ============================================

class TestFigure6:
    """Avoid-list tampering on the six-node topology."""

    def test_attack_succeeds_against_intermediate(self):
        assert figure6_outcome(rushed_is_destination=False) is False

    def test_attack_fails_when_rushed_node_is_destination(self):
        assert figure6_outcome(rushed_is_destination=True) is True
        assert figure6_routes(rushed_is_destination=True) == {(0, 1, 3)}

    def test_without_attack_good_route_found(self):
        routes = figure6_routes(rushed_is_destination=False, attack=False)

        assert routes == {(0, 1, 3, 4)}
        assert all(FIGURE6_ATTACKER not in route for route in routes)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_outcome_does_not_depend_on_jitter_draws(self, seed):
        assert figure6_outcome(rushed_is_destination=False, seed=seed) is False
        assert figure6_outcome(rushed_is_destination=True, seed=seed) is True


# ============================================
# Report Tests
# ============================================

class TestReport:
    """All oracles together."""

    def test_small_report_passes(self):
        report = run_oracles(seed=3, rating_sequences=50, discovery_cases=10)

        assert report.rating_mismatches == 0
        assert report.discovery_mismatches == 0
        assert report.deadlock_pessimistic_delivered == 0
        assert report.passed
        assert report.model_dump()["passed"] is True


# ============================================
# Run Tests
# ============================================

if __name__ == "__main__":
    pytest.main([__file__, "-v"])
