# app/core/oracles.py

"""
Independent reference computations used to cross-check the simulator.

- `replay_ratings`: a plain fold over an observation log, written without
  the ranker's data structures.
- `enumerate_accepted_routes`: brute force over every simple path of a
  static graph, applying the request suppression and reply rules in flood
  order (shortest record first, then lowest hop sequence).
- `discover_routes`: the same question answered by the engine itself, with
  slotted airtime and no jitter so its flood runs in that exact order.
- `figure6_outcome`: the six-node rushing-attack topology.
"""

import logging
import math
from typing import Iterable, Literal, Optional, Union

import networkx as nx
import numpy as np
from pydantic import BaseModel, Field, computed_field

from app.core.engine import Simulator
from app.core.radio import Radio
from app.core.route_ranker import RouteRanker
from app.models.observation import ObservationEvent, RankerParams
from app.models.packet import SECOND, NodeId, to_us
from app.models.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

Route = tuple[NodeId, ...]
FaultyLists = dict[NodeId, frozenset[NodeId]]


# ============================================
# Arithmetic
# ============================================

def expected_airtime_us(payload_bytes: int, header_bytes: int, bandwidth_bps: int) -> float:
    return (payload_bytes + header_bytes) * 8 / bandwidth_bps * SECOND


def expected_position(
    start: tuple[float, float], waypoint: tuple[float, float], speed: float, t_s: float
) -> tuple[float, float]:
    dx, dy = waypoint[0] - start[0], waypoint[1] - start[1]
    length = math.hypot(dx, dy)
    travelled = min(length, speed * t_s)
    if length == 0:
        return start
    return (start[0] + dx * travelled / length, start[1] + dy * travelled / length)


def expected_balance(initial: float, car: float, elapsed_s: float, ceiling: float) -> float:
    return min(ceiling, initial + car * elapsed_s)


# ============================================
# Rating replay
# ============================================

RatingStep = Union[
    tuple[Literal["event"], NodeId, Literal["positive", "negative"], int],
    tuple[Literal["sweep"], int],
]


def replay_ratings(steps: Iterable[RatingStep], params: RankerParams) -> dict[NodeId, tuple[int, bool, int]]:
    """Final (rating, faulty, last_event) per node after a log of events and sweeps."""
    state: dict[NodeId, tuple[int, bool, int]] = {}
    for step in steps:
        if step[0] == "sweep":
            now = step[1]
            state = {
                node: (params.faulty_threshold, False, last)
                if faulty and now - last >= params.faulty_timeout
                else (rating, faulty, last)
                for node, (rating, faulty, last) in state.items()
            }
            continue

        _, subject, sign, time = step
        rating, faulty, _ = state.get(subject, (params.neutral, False, 0))
        delta = params.positive_step if sign == "positive" else params.negative_step
        rating = max(params.floor, rating + delta)
        state[subject] = (rating, faulty or rating < params.faulty_threshold, time)
    return state


def apply_steps(ranker: RouteRanker, steps: Iterable[RatingStep]) -> None:
    """Drive a ranker with the same log `replay_ratings` folds."""
    for step in steps:
        if step[0] == "sweep":
            ranker.second_chance_sweep(step[1])
        else:
            _, subject, sign, time = step
            ranker.apply_event(
                ObservationEvent(observer=ranker.owner, subject=subject, sign=sign, time=time)
            )


def random_rating_steps(rng: np.random.Generator, length: int, subjects: int = 3) -> list[RatingStep]:
    steps: list[RatingStep] = []
    now = 0
    for _ in range(length):
        now += int(rng.integers(0, 5 * SECOND))
        if rng.random() < 0.1:
            steps.append(("sweep", now))
        else:
            sign = "positive" if rng.random() < 0.35 else "negative"
            steps.append(("event", int(rng.integers(subjects)) + 1, sign, now))
    return steps


def ranker_matches_replay(steps: list[RatingStep], params: RankerParams) -> bool:
    ranker = RouteRanker(0, params)
    apply_steps(ranker, steps)
    expected = replay_ratings(steps, params)
    for node, (rating, faulty, last) in expected.items():
        entry = ranker.ratings.get(node)
        if entry is None or (entry.rating, entry.faulty, entry.last_event) != (rating, faulty, last):
            return False
    return set(ranker.ratings) == set(expected)


# ============================================
# Route discovery
# ============================================

def enumerate_accepted_routes(
    graph: nx.Graph, src: NodeId, dst: NodeId, faulty: FaultyLists
) -> set[Route]:
    """Routes the originator ends up accepting, by brute force over simple paths."""

    def faulty_of(node: NodeId) -> frozenset[NodeId]:
        return faulty.get(node, frozenset())

    def avoid_of(record: Route) -> frozenset[NodeId]:
        return frozenset().union(*(faulty_of(node) for node in record))

    records: list[Route] = [(src,)]
    for target in graph.nodes:
        if target != src:
            records.extend(tuple(path) for path in nx.all_simple_paths(graph, src, target))
    records.sort(key=lambda record: (len(record), record))

    first_copy: dict[NodeId, Route] = {}
    transmitted: list[Route] = []
    for record in records:
        holder = record[-1]
        if len(record) > 1:
            prefix = record[:-1]
            if holder == dst or first_copy.get(holder) != prefix:
                continue
            avoid = avoid_of(prefix)
            if avoid & set(prefix) or holder in avoid:
                continue
        transmitted.append(record)
        for neighbor in sorted(graph.neighbors(holder)):
            if neighbor not in record and neighbor not in first_copy:
                first_copy[neighbor] = record

    accepted: set[Route] = set()
    for record in transmitted:
        if dst in record or not graph.has_edge(record[-1], dst):
            continue
        if avoid_of(record) & set(record):
            continue
        route = record + (dst,)
        forwarders = set(record)
        relays_ok = all(not (faulty_of(relay) & forwarders) for relay in route[1:-1])
        if relays_ok and not (faulty_of(src) & forwarders):
            accepted.add(route)
    return accepted


def discovery_config(positions: list[tuple[float, float]], width: float, height: float) -> ScenarioConfig:
    return ScenarioConfig(
        num_nodes=len(positions),
        positions=positions,
        area_width=width,
        area_height=height,
        pause_time=math.inf,
        concurrent_connections=0,
        mode="ocean",
        uniform_tx_time_us=1000,
        rreq_jitter_min_ms=0.0,
        rreq_jitter_max_ms=0.0,
        faulty_timeout=10_000.0,
        sim_duration=1.0,
    )


def discover_routes(
    positions: list[tuple[float, float]],
    src: NodeId,
    dst: NodeId,
    faulty: FaultyLists,
    width: float = 600.0,
    height: float = 600.0,
) -> set[Route]:
    """Routes the engine's originator accepts after one flood."""
    sim = Simulator(discovery_config(positions, width, height))
    for node, accused in faulty.items():
        for other in sorted(accused):
            sim.nodes[node].ranker.mark_faulty(other, 0)
    sim.schedule(0, sim.nodes[src].request_route, dst, 0)
    sim.run_until(to_us(0.4))
    return {route.hops for route in sim.nodes[src].router.cache.routes_to(dst, sim.now)}


class MicroTopology(BaseModel):
    positions: list[tuple[float, float]]
    src: NodeId
    dst: NodeId
    faulty: dict[NodeId, frozenset[NodeId]] = Field(default_factory=dict)
    width: float = 600.0
    height: float = 600.0
    radio_range: float = 250.0

    def graph(self) -> nx.Graph:
        cfg = discovery_config(self.positions, self.width, self.height)
        return Radio(cfg).connectivity_graph(np.array(self.positions, dtype=float))


def random_micro_topology(
    rng: np.random.Generator, max_nodes: int = 6, faulty_prob: float = 0.2
) -> MicroTopology:
    """A connected static unit-disk topology of 3..max_nodes nodes with random faulty lists."""
    while True:
        count = int(rng.integers(3, max_nodes + 1))
        positions = [(float(rng.uniform(0, 600)), float(rng.uniform(0, 600))) for _ in range(count)]
        case = MicroTopology(positions=positions, src=0, dst=count - 1)
        if nx.is_connected(case.graph()):
            break

    faulty = {}
    for node in range(count):
        accused = frozenset(
            other for other in range(count) if other != node and rng.random() < faulty_prob
        )
        if accused:
            faulty[node] = accused
    return case.model_copy(update={"faulty": faulty})


def check_micro_topology(case: MicroTopology) -> tuple[set[Route], set[Route]]:
    expected = enumerate_accepted_routes(case.graph(), case.src, case.dst, case.faulty)
    actual = discover_routes(case.positions, case.src, case.dst, case.faulty, case.width, case.height)
    return expected, actual


# ============================================
# Rushing attack topology
# ============================================

# S=0, A=1, M=2 (misleading, tampers avoid lists), R=3, D=4, bystander E=5.
# S-A, S-M, A-M, A-R, M-R, R-D and S-E are the only links.
FIGURE6_POSITIONS = [
    (250.0, 150.0),
    (450.0, 250.0),
    (450.0, 50.0),
    (650.0, 150.0),
    (850.0, 150.0),
    (50.0, 150.0),
]
FIGURE6_ATTACKER = 2


def figure6_config(attack: bool = True) -> ScenarioConfig:
    return ScenarioConfig(
        num_nodes=len(FIGURE6_POSITIONS),
        positions=FIGURE6_POSITIONS,
        pause_time=math.inf,
        concurrent_connections=0,
        mode="ocean",
        node_behaviors={FIGURE6_ATTACKER: "misleading"},
        misleading_rush=attack,
        rreq_jitter_min_ms=1.0,
        rreq_jitter_max_ms=10.0,
        faulty_timeout=1_000.0,
        sim_duration=5.0,
    )


def figure6_routes(rushed_is_destination: bool, attack: bool = True, seed: int = 0) -> set[Route]:
    """Routes S accepts toward R (as destination) or toward D (R intermediate)."""
    cfg = figure6_config(attack).model_copy(update={"seed": seed})
    sim = Simulator(cfg)
    source = sim.nodes[0]
    source.ranker.mark_faulty(FIGURE6_ATTACKER, 0)
    dst = 3 if rushed_is_destination else 4
    sim.schedule(0, source.request_route, dst, 0)
    sim.run_until(to_us(3.0))
    return {route.hops for route in source.router.cache.routes_to(dst, sim.now)}


def figure6_outcome(rushed_is_destination: bool, attack: bool = True, seed: int = 0) -> bool:
    """True when S learns a route that avoids the attacker."""
    routes = figure6_routes(rushed_is_destination, attack, seed)
    return any(FIGURE6_ATTACKER not in route for route in routes)


# ============================================
# Chip deadlock
# ============================================

# X=0, A=1, B=2, Y=3 on a line; A sends to Y through B and B sends to X
# through A, so each relay depends on the other.
DEADLOCK_POSITIONS = [(100.0, 150.0), (300.0, 150.0), (500.0, 150.0), (700.0, 150.0)]
DEADLOCK_CONNECTIONS = [(1, 3), (2, 0)]


def deadlock_config(scheme: str = "pessimistic", car: float = 0.0, seed: int = 0) -> ScenarioConfig:
    return ScenarioConfig(
        seed=seed,
        num_nodes=len(DEADLOCK_POSITIONS),
        positions=DEADLOCK_POSITIONS,
        connections=DEADLOCK_CONNECTIONS,
        pause_time=math.inf,
        mode="defenseless",
        economy=True,
        chip_scheme=scheme,
        car=car,
        initial_balance=0.0,
        spend_threshold=0.0,
        sim_duration=20.0,
    )


def deadlock_delivered(scheme: str = "pessimistic", car: float = 0.0, seed: int = 0) -> int:
    """Packets delivered on the two-relay line under the given economy."""
    return Simulator(deadlock_config(scheme, car, seed)).run().delivered


# ============================================
# Report
# ============================================

class OracleReport(BaseModel):
    rating_sequences: int
    rating_mismatches: int
    discovery_cases: int
    discovery_mismatches: int
    discovery_examples: list[dict] = Field(default_factory=list)
    figure6_attack_blocks_intermediate: bool
    figure6_destination_escapes: bool
    figure6_no_attack_finds_route: bool
    deadlock_pessimistic_delivered: int
    deadlock_optimistic_delivered: int
    deadlock_accrual_delivered: int

    @computed_field
    @property
    def passed(self) -> bool:
        return (
            self.rating_mismatches == 0
            and self.discovery_mismatches == 0
            and self.figure6_attack_blocks_intermediate
            and self.figure6_destination_escapes
            and self.figure6_no_attack_finds_route
            and self.deadlock_pessimistic_delivered == 0
            and self.deadlock_optimistic_delivered > 0
            and self.deadlock_accrual_delivered > 0
        )


def run_oracles(
    seed: int = 0, rating_sequences: int = 1000, discovery_cases: int = 200, params: Optional[RankerParams] = None
) -> OracleReport:
    rng = np.random.default_rng(seed)
    params = params or RankerParams(faulty_timeout=30 * SECOND)

    rating_mismatches = 0
    for _ in range(rating_sequences):
        steps = random_rating_steps(rng, int(rng.integers(1, 120)))
        if not ranker_matches_replay(steps, params):
            rating_mismatches += 1

    discovery_mismatches = 0
    examples = []
    for _ in range(discovery_cases):
        case = random_micro_topology(rng)
        expected, actual = check_micro_topology(case)
        if expected != actual:
            discovery_mismatches += 1
            if len(examples) < 5:
                examples.append(
                    {
                        "case": case.model_dump(mode="json"),
                        "expected": sorted(expected),
                        "actual": sorted(actual),
                    }
                )

    report = OracleReport(
        rating_sequences=rating_sequences,
        rating_mismatches=rating_mismatches,
        discovery_cases=discovery_cases,
        discovery_mismatches=discovery_mismatches,
        discovery_examples=examples,
        figure6_attack_blocks_intermediate=not figure6_outcome(rushed_is_destination=False),
        figure6_destination_escapes=figure6_outcome(rushed_is_destination=True),
        figure6_no_attack_finds_route=figure6_outcome(rushed_is_destination=False, attack=False),
        deadlock_pessimistic_delivered=deadlock_delivered("pessimistic", 0.0),
        deadlock_optimistic_delivered=deadlock_delivered("optimistic", 0.0),
        deadlock_accrual_delivered=deadlock_delivered("pessimistic", 1.0),
    )
    logger.info(
        "oracles: ratings %d/%d ok, discovery %d/%d ok, passed=%s",
        rating_sequences - rating_mismatches, rating_sequences,
        discovery_cases - discovery_mismatches, discovery_cases,
        report.passed,
    )
    return report
