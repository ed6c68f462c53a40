# app/core/behavior.py

"""
Per-node strategies: cooperating, misleading, selfish and rushing.

The functions here are pure decisions; the node glue applies them before
handing a packet to the router.
"""

from typing import Literal

import numpy as np

from app.models.metrics import NodeClass
from app.models.observation import BehaviorKind, BehaviorProfile
from app.models.packet import DataPacket, NodeId, RouteRequest
from app.models.scenario import ScenarioConfig


DataVerdict = Literal["forward", "silent_drop"]
RreqVerdict = Literal["participate", "silent_drop", "rush_tampered"]


# ============================================
# Decisions
# ============================================

def decide_data_forward(profile: BehaviorProfile, packet: DataPacket, self_id: NodeId) -> DataVerdict:
    """Misleading and selfish nodes drop transit DATA; own traffic is untouched."""
    if packet.src == self_id or packet.dst == self_id:
        return "forward"
    if profile.kind in ("misleading", "selfish"):
        return "silent_drop"
    return "forward"


def decide_rreq(profile: BehaviorProfile, packet: RouteRequest, self_id: NodeId) -> RreqVerdict:
    if packet.dst == self_id:
        return "participate"
    if profile.kind == "selfish":
        return "silent_drop"
    if profile.tamper_avoid_list:
        return "rush_tampered"
    return "participate"


def tamper_avoid_list(profile: BehaviorProfile, packet: RouteRequest, self_id: NodeId) -> RouteRequest:
    """Strip self and the profile's victims from the avoid list; the record is untouched."""
    stripped = packet.avoid_list - {self_id} - profile.strip_from_avoid
    if stripped == packet.avoid_list:
        return packet
    return packet.model_copy(update={"avoid_list": stripped})


def pad_route_record(
    profile: BehaviorProfile,
    packet: RouteRequest,
    neighbors: list[NodeId],
    phantom_base: int,
) -> RouteRequest:
    """
    Grow the record after the attacker's own hop.

    Padding appends real neighbors not already on the record; bogus hops
    append ids that belong to no node (`phantom_base` and above).
    """
    if not profile.route_padding and not profile.bogus_hops:
        return packet

    record = list(packet.route_record)
    on_record = set(record)
    padding = [n for n in sorted(neighbors) if n not in on_record and n != packet.dst]
    record.extend(padding[: profile.route_padding])
    record.extend(phantom_base + i for i in range(profile.bogus_hops))
    return packet.model_copy(update={"route_record": tuple(record)})


def node_class(profile: BehaviorProfile) -> NodeClass:
    return profile.kind


# ============================================
# Assignment
# ============================================

def build_profile(kind: BehaviorKind, cfg: ScenarioConfig) -> BehaviorProfile:
    if kind == "cooperating":
        return BehaviorProfile()

    strip = frozenset(cfg.rush_strip)
    if kind == "rushing":
        return BehaviorProfile(
            kind="rushing",
            tamper_avoid_list=True,
            strip_from_avoid=strip,
            route_padding=cfg.route_padding,
            bogus_hops=cfg.bogus_hops,
        )
    if kind == "misleading":
        return BehaviorProfile(
            kind="misleading",
            runs_ocean=cfg.misbehaving_runs_ocean,
            tamper_avoid_list=cfg.misleading_rush,
            strip_from_avoid=strip if cfg.misleading_rush else frozenset(),
        )
    return BehaviorProfile(kind="selfish", runs_ocean=False)


def assign_profiles(cfg: ScenarioConfig, rng: np.random.Generator) -> list[BehaviorProfile]:
    """Pinned kinds first, then seeded random placement of the counted kinds."""
    kinds: list[BehaviorKind] = ["cooperating"] * cfg.num_nodes
    for node, kind in cfg.node_behaviors.items():
        kinds[node] = kind

    free = np.array([n for n in range(cfg.num_nodes) if n not in cfg.node_behaviors], dtype=int)
    chosen = rng.permutation(free)
    cursor = 0
    for kind, count in ((cfg.misbehaving_kind, cfg.num_misbehaving), ("rushing", cfg.num_rushing)):
        for node in chosen[cursor: cursor + count]:
            kinds[int(node)] = kind
        cursor += count

    return [build_profile(kind, cfg) for kind in kinds]
