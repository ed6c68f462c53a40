# tests/test_engine.py

"""
Tests for the event queue, radio, mobility, traffic and whole runs.
"""

import math

import networkx as nx
import numpy as np
import pytest

from app.core.engine import EventQueue, Simulator
from app.core.errors import ContractViolation
from app.core.mobility import RandomWaypoint
from app.core.oracles import expected_airtime_us, expected_position
from app.core.radio import Radio
from app.models.packet import SECOND, DataPacket, RouteError, RouteRequest, to_us
from app.models.scenario import ScenarioConfig


# ============================================
# Test Data
# ============================================

LINE = [(100.0, 150.0), (300.0, 150.0), (500.0, 150.0), (700.0, 150.0)]


def make_small(**kwargs) -> ScenarioConfig:
    params = dict(
        num_nodes=15,
        area_width=800.0,
        area_height=300.0,
        concurrent_connections=3,
        sim_duration=10.0,
    )
    params.update(kwargs)
    return ScenarioConfig(**params)


def make_line(**kwargs) -> ScenarioConfig:
    params = dict(
        num_nodes=4,
        positions=LINE,
        pause_time=math.inf,
        connections=[(0, 3)],
        sim_duration=10.0,
    )
    params.update(kwargs)
    return ScenarioConfig(**params)


def make_streams(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


# ============================================
# Event Queue Tests
# ============================================

class TestEventQueue:
    """Time order, then insertion order."""

    def test_ties_pop_in_insertion_order(self):
        queue = EventQueue()
        seen = []
        queue.push(5, seen.append, "b")
        queue.push(1, seen.append, "a")
        queue.push(5, seen.append, "c")

        while queue:
            _, callback, args = queue.pop()
            callback(*args)

        assert seen == ["a", "b", "c"]

    def test_scheduling_in_the_past_is_a_contract_violation(self):
        queue = EventQueue()
        queue.push(10, print)
        queue.pop()

        with pytest.raises(ContractViolation):
            queue.push(9, print)

    def test_events_beyond_horizon_discarded(self):
        queue = EventQueue(horizon=100)
        queue.push(100, print)
        queue.push(101, print)

        assert len(queue) == 1


# ============================================
# Radio Tests
# ============================================

class TestRadio:
    """Unit disk and airtime."""

    def test_airtime_matches_bits_over_bandwidth(self):
        radio = Radio(ScenarioConfig())
        packet = DataPacket(src=0, dst=2, seq=0, route=(0, 1, 2))

        assert radio.tx_time(packet) == pytest.approx(expected_airtime_us(64, 40, 2_000_000))

    def test_uniform_airtime_override(self):
        radio = Radio(ScenarioConfig(uniform_tx_time_us=1000))
        packet = DataPacket(src=0, dst=2, seq=0, route=(0, 1, 2), payload_size=1500)

        assert radio.tx_time(packet) == 1000

    def test_range_is_inclusive_and_symmetric(self):
        radio = Radio(ScenarioConfig())
        positions = np.array([(0.0, 0.0), (250.0, 0.0), (500.1, 0.0)])

        assert radio.in_range(positions, 0) == [1]
        assert radio.in_range(positions, 1) == [0]
        assert radio.in_range(positions, 2) == []

    def test_connectivity_graph(self):
        graph = Radio(ScenarioConfig()).connectivity_graph(np.array(LINE))

        assert sorted(graph.edges) == [(0, 1), (1, 2), (2, 3)]


# ============================================
# Mobility Tests
# ============================================

class TestMobility:
    """Random waypoint kinematics."""

    def test_explicit_leg_matches_kinematics(self):
        cfg = ScenarioConfig(num_nodes=1, positions=[(0.0, 0.0)], pause_time=math.inf)
        mobility = RandomWaypoint(cfg, make_streams(0, 1))
        mobility.place(0, (0.0, 0.0), waypoint=(300.0, 400.0), speed=10.0)

        for t in (0.0, 12.5, 50.0, 80.0):
            x, y = mobility.position(0, to_us(t))
            ex, ey = expected_position((0.0, 0.0), (300.0, 400.0), 10.0, t)
            assert x == pytest.approx(ex)
            assert y == pytest.approx(ey)

    def test_pause_then_new_leg(self):
        cfg = ScenarioConfig(num_nodes=1, positions=[(0.0, 0.0)], pause_time=5.0)
        mobility = RandomWaypoint(cfg, make_streams(0, 1))
        mobility.place(0, (0.0, 0.0), waypoint=(100.0, 0.0), speed=10.0)

        assert mobility.position(0, to_us(12.0)) == pytest.approx((100.0, 0.0))
        assert mobility.is_paused(0, to_us(12.0))

        mobility.positions(to_us(15.0) + 1)
        assert mobility.t_start[0] == to_us(15.0)
        assert tuple(mobility.start[0]) == (100.0, 0.0)

    def test_static_nodes_never_move(self):
        cfg = ScenarioConfig(num_nodes=4, positions=LINE, pause_time=math.inf)
        mobility = RandomWaypoint(cfg, make_streams(0, 4))

        assert np.allclose(mobility.positions(to_us(500.0)), np.array(LINE))

    def test_positions_independent_of_query_pattern(self):
        cfg = ScenarioConfig(num_nodes=10)
        often = RandomWaypoint(cfg, make_streams(3, 10))
        once = RandomWaypoint(cfg, make_streams(3, 10))

        for t in range(0, 200, 1):
            often.positions(t * SECOND)

        assert np.allclose(often.positions(200 * SECOND), once.positions(200 * SECOND))

    def test_positions_cached_per_instant(self):
        cfg = ScenarioConfig(num_nodes=5)
        mobility = RandomWaypoint(cfg, make_streams(2, 5))

        first = mobility.positions(SECOND)

        assert mobility.positions(SECOND) is first
        assert not first.flags.writeable
        assert mobility.positions(SECOND + 1) is not first

    def test_place_invalidates_cached_positions(self):
        cfg = ScenarioConfig(num_nodes=2, positions=[(0.0, 0.0), (10.0, 0.0)], pause_time=math.inf)
        mobility = RandomWaypoint(cfg, make_streams(0, 2))
        mobility.positions(0)

        mobility.place(1, (50.0, 0.0))

        assert tuple(mobility.positions(0)[1]) == (50.0, 0.0)

    def test_positions_stay_in_area(self):
        cfg = ScenarioConfig(num_nodes=20)
        mobility = RandomWaypoint(cfg, make_streams(5, 20))

        for t in range(0, 300, 7):
            positions = mobility.positions(t * SECOND)
            assert (positions[:, 0] >= 0).all() and (positions[:, 0] <= cfg.area_width).all()
            assert (positions[:, 1] >= 0).all() and (positions[:, 1] <= cfg.area_height).all()


# ============================================
# Traffic Tests
# ============================================

class TestTraffic:
    """Connection pairs respect the hop minimum."""

    def test_eligible_pairs_on_line(self):
        sim = Simulator(make_line(connections=None, concurrent_connections=1))

        pairs = sim.traffic.eligible_pairs(0)

        assert (0, 1) not in pairs
        assert (0, 2) in pairs
        assert (3, 0) in pairs

    def test_eligible_pairs_match_graph_distances(self):
        sim = Simulator(make_small(seed=4))
        positions = sim.mobility.positions(0)
        lengths = dict(nx.all_pairs_shortest_path_length(sim.radio.connectivity_graph(positions)))

        expected = [
            (src, dst)
            for src in sorted(lengths)
            for dst, hops in sorted(lengths[src].items())
            if hops >= sim.cfg.min_connection_hops
        ]

        assert sim.traffic.eligible_pairs(0) == expected

    def test_pinned_connection_reopens(self):
        sim = Simulator(make_line(packets_per_connection=2))
        sim.run_until(to_us(2.0))

        assert len(sim.traffic.history) >= 3
        assert all((c.src, c.dst) == (0, 3) for c in sim.traffic.history)


# ============================================
# Delivery Filter Tests
# ============================================

class TestDeliveryFilter:
    """Copies that cannot change a receiver's state are not scheduled."""

    def test_seen_request_not_wanted(self):
        sim = Simulator(make_line(mode="ocean"))
        node = sim.nodes[1]
        rreq = RouteRequest(src=0, dst=3, seq=0, route_record=(0,))

        assert node.wants(rreq, 0, addressed=True)
        node.receive(rreq, 0, True, 0)
        assert not node.wants(rreq.model_copy(update={"route_record": (0, 2)}), 2, addressed=True)

    def test_target_wants_every_request_copy(self):
        sim = Simulator(make_line(mode="ocean"))
        target = sim.nodes[3]
        target.router.seen.add((0, 0))

        assert target.wants(RouteRequest(src=0, dst=3, seq=0, route_record=(0, 1, 2)), 2, addressed=True)

    def test_malformed_request_still_delivered(self):
        sim = Simulator(make_line(mode="ocean"))
        node = sim.nodes[1]
        node.router.seen.add((0, 0))

        assert node.wants(RouteRequest(src=0, dst=3, seq=0, route_record=(0, 2, 2)), 2, addressed=True)

    def test_only_upstream_hop_overhears_data(self):
        sim = Simulator(make_line(mode="ocean"))
        packet = DataPacket(src=0, dst=3, seq=0, route=(0, 1, 2, 3), index=2)

        assert sim.nodes[0].wants(packet, 1, addressed=False)
        assert not sim.nodes[3].wants(packet, 1, addressed=False)
        assert sim.nodes[2].wants(packet, 1, addressed=True)

    def test_defenseless_nodes_ignore_overheard_data(self):
        sim = Simulator(make_line(mode="defenseless"))
        packet = DataPacket(src=0, dst=3, seq=0, route=(0, 1, 2, 3), index=2)

        assert not sim.nodes[0].wants(packet, 1, addressed=False)

    def test_alarm_overheard_only_in_sechand(self):
        rerr = RouteError(src=2, dst=0, seq=0, broken_link=(2, 3), alarm=3, return_route=(2, 1, 0), index=1)

        assert Simulator(make_line(mode="sechand")).nodes[3].wants(rerr, 2, addressed=False)
        assert not Simulator(make_line(mode="ocean")).nodes[3].wants(rerr, 2, addressed=False)

    def test_trace_counts_every_node_in_range(self):
        sim = Simulator(make_line(mode="defenseless"), trace=True)
        sim.run()

        data = [entry for entry in sim.trace if entry["kind"] == "DATA" and entry["sender"] == 1]
        assert data and all(entry["heard_by"] == 2 for entry in data)


# ============================================
# Whole-Run Tests
# ============================================

class TestRuns:
    """End-to-end behavior of small scenarios."""

    def test_same_seed_same_metrics(self):
        cfg = make_small(seed=11)

        first = Simulator(cfg).run()
        second = Simulator(cfg).run()

        assert first.model_dump_json() == second.model_dump_json()

    def test_different_seeds_differ(self):
        first = Simulator(make_small(seed=1)).run()
        second = Simulator(make_small(seed=2)).run()

        assert first.model_dump() != second.model_dump()

    @pytest.mark.parametrize("mode", ["defenseless", "ocean", "sechand"])
    def test_conservation(self, mode):
        metrics = Simulator(make_small(mode=mode, num_misbehaving=4, link_loss_prob=0.05)).run()

        assert metrics.originated > 0
        assert metrics.accounted() == metrics.originated
        for stats in metrics.classes.values():
            assert stats.delivered <= stats.originated

    def test_conservation_with_economy(self):
        cfg = make_small(economy=True, chip_scheme="pessimistic", car=0.2, misbehaving_kind="selfish", num_misbehaving=3)

        metrics = Simulator(cfg).run()

        assert metrics.accounted() == metrics.originated

    def test_static_line_delivers(self):
        metrics = Simulator(make_line(mode="defenseless")).run()

        assert metrics.delivered > 0
        assert metrics.drops["dropped_link_loss"] == 0
        assert metrics.drops["dropped_misbehavior"] == 0

    def test_misleading_relay_drops_everything(self):
        metrics = Simulator(make_line(mode="defenseless", node_behaviors={1: "misleading"})).run()

        assert metrics.delivered == 0
        assert metrics.drops["dropped_misbehavior"] > 0

    def test_ocean_detects_misleading_relay(self):
        sim = Simulator(make_line(mode="ocean", node_behaviors={1: "misleading"}, faulty_threshold=-4))

        sim.run()

        assert sim.nodes[0].ranker.is_faulty(1)

    def test_ocean_never_transmits_an_alarm(self):
        cfg = make_small(mode="ocean", num_misbehaving=4, faulty_threshold=-2, link_loss_prob=0.25)
        sim = Simulator(cfg, trace=True)

        metrics = sim.run()

        errors = [entry for entry in sim.trace if entry["kind"] == "RERR"]
        assert errors
        assert all(entry["alarm"] is None for entry in errors)
        assert metrics.alarms == 0

    def test_selfish_nodes_never_relay_on_accepted_routes(self):
        cfg = make_small(mode="ocean", misbehaving_kind="selfish", num_misbehaving=4, sim_duration=20.0)
        sim = Simulator(cfg)
        sim.run()
        selfish = {i for i, profile in enumerate(sim.profiles) if profile.kind == "selfish"}

        routes = [
            route.hops
            for node in sim.nodes
            for dst in range(sim.cfg.num_nodes)
            for route in node.router.cache.routes_to(dst, sim.now)
        ]
        assert routes
        assert all(not selfish.intersection(hops[1:-1]) for hops in routes)

    def test_all_misleading_leaves_no_cooperating_traffic(self):
        metrics = Simulator(make_small(num_nodes=15, num_misbehaving=15)).run()

        assert metrics.classes["cooperating"].nodes == 0
        assert metrics.classes["cooperating"].originated == 0
        assert metrics.classes["misleading"].delivery_ratio < 0.3

    def test_trace_records_transmissions(self):
        sim = Simulator(make_line(mode="defenseless"), trace=True)
        sim.run()

        kinds = {entry["kind"] for entry in sim.trace}
        assert {"RREQ", "RREP", "DATA"} <= kinds
        assert all(entry["t_us"] <= to_us(10.0) for entry in sim.trace)

    def test_faulty_series_sampled_every_second(self):
        metrics = Simulator(make_small(sim_duration=5.0)).run()

        assert [t for t, _ in metrics.faulty_series] == [1.0, 2.0, 3.0, 4.0, 5.0]


# ============================================
# Run Tests
# ============================================

if __name__ == "__main__":
    pytest.main([__file__, "-v"])
