# app/core/mobility.py

"""
Random-waypoint mobility evaluated on demand.

Each node moves on a piecewise-linear leg from `start` to `dest`, arriving
at `t_arrive` and pausing until `t_leave`; a new leg is drawn from the
node's own random stream only when simulation time passes `t_leave`, so
positions never depend on how often they are queried. Times are
microseconds held in float arrays; an infinite pause freezes the node.
"""

import math
from typing import Optional

import numpy as np

from app.models.packet import SECOND, NodeId, SimTime
from app.models.scenario import ScenarioConfig


class RandomWaypoint:
    """Positions of all nodes in one scenario."""

    def __init__(self, cfg: ScenarioConfig, streams: list[np.random.Generator]):
        self.width = cfg.area_width
        self.height = cfg.area_height
        self.min_speed = cfg.min_speed
        self.max_speed = cfg.max_speed
        self.pause_us = math.inf if cfg.is_static else cfg.pause_time * SECOND
        self.streams = streams

        count = cfg.num_nodes
        if cfg.positions is not None:
            initial = np.array(cfg.positions, dtype=float)
        else:
            initial = np.array([self._uniform_point(stream) for stream in streams], dtype=float)

        self.start = initial.copy()
        self.dest = initial.copy()
        self.t_start = np.zeros(count)
        self.t_arrive = np.zeros(count)
        self.t_leave = np.full(count, self.pause_us, dtype=float)
        self.speed = np.zeros(count)
        self._now: SimTime = 0
        self._next_leave = float(self.t_leave.min()) if count else math.inf
        self._cached: Optional[tuple[SimTime, np.ndarray]] = None

    def _uniform_point(self, stream: np.random.Generator) -> tuple[float, float]:
        return (stream.uniform(0.0, self.width), stream.uniform(0.0, self.height))

    def _new_leg(self, node: NodeId) -> None:
        stream = self.streams[node]
        origin = self.dest[node].copy()
        target = np.array(self._uniform_point(stream))
        speed = stream.uniform(self.min_speed, self.max_speed)
        departure = self.t_leave[node]
        travel_us = float(np.hypot(*(target - origin))) / speed * SECOND

        self.start[node] = origin
        self.dest[node] = target
        self.speed[node] = speed
        self.t_start[node] = departure
        self.t_arrive[node] = departure + travel_us
        self.t_leave[node] = self.t_arrive[node] + self.pause_us

    def place(
        self,
        node: NodeId,
        position: tuple[float, float],
        waypoint: Optional[tuple[float, float]] = None,
        speed: Optional[float] = None,
        at: SimTime = 0,
    ) -> None:
        """Pin a node, optionally on an explicit leg toward `waypoint`."""
        self.start[node] = position
        self.t_start[node] = at
        if waypoint is None or speed is None:
            self.dest[node] = position
            self.speed[node] = 0.0
            self.t_arrive[node] = at
        else:
            self.dest[node] = waypoint
            self.speed[node] = speed
            distance = float(np.hypot(waypoint[0] - position[0], waypoint[1] - position[1]))
            self.t_arrive[node] = at + distance / speed * SECOND
        self.t_leave[node] = self.t_arrive[node] + self.pause_us
        self._next_leave = float(self.t_leave.min())
        self._cached = None

    # ============================================
    # Stepping
    # ============================================

    def step_mobility(self, now: SimTime) -> None:
        """Draw every leg that starts at or before `now`."""
        if now < self._now:
            return
        self._now = now
        if now < self._next_leave:
            return
        while True:
            due = np.flatnonzero(self.t_leave <= now)
            if due.size == 0:
                break
            for node in due:
                self._new_leg(int(node))
        self._next_leave = float(self.t_leave.min())
        self._cached = None

    def positions(self, now: SimTime) -> np.ndarray:
        """Positions at `now`; repeated queries at one instant share a read-only array."""
        if self._cached is not None and self._cached[0] == now:
            return self._cached[1]
        self.step_mobility(now)
        span = self.t_arrive - self.t_start
        with np.errstate(divide="ignore", invalid="ignore"):
            fraction = np.where(span > 0, (now - self.t_start) / span, 1.0)
        fraction = np.clip(fraction, 0.0, 1.0)[:, None]
        positions = self.start + (self.dest - self.start) * fraction
        positions.flags.writeable = False
        self._cached = (now, positions)
        return positions

    def position(self, node: NodeId, now: SimTime) -> tuple[float, float]:
        x, y = self.positions(now)[node]
        return float(x), float(y)

    def is_paused(self, node: NodeId, now: SimTime) -> bool:
        self.step_mobility(now)
        return now >= self.t_arrive[node]
