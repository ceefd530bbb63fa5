"""Scripted leader and follower behaviors for the exhibition task.

The local user is a holonomic walker; the robot moves through DriveCommands
produced by a simple pilot. Awareness gating happens outside: brains that
pause for a lagging partner receive partner_distance=None when the
condition strips indicator data, and the robot follower receives
aware=False when it must rely on camera sightings alone.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Any, Mapping

from .config import SimConfig
from .errors import DegenerateGeometryError
from .geometry import Pose2D, distance, in_fov, relative_bearing
from .kinematics import DriveCommand, RobotState
from .scenario import Board

# Pilot tuning: bang-bang steering with a small deadband, forward gated on
# rough alignment so the robot does not orbit its target.
TURN_DEADBAND_RAD = math.radians(5.0)
FORWARD_CONE_RAD = math.radians(60.0)
REACH_RADIUS_M = 0.15


def pilot_command(pose: Pose2D, target: tuple[float, float], stop_radius: float = REACH_RADIUS_M) -> DriveCommand:
    """Steer a unicycle robot toward a target point."""
    if distance(pose.position, target) <= stop_radius:
        return DriveCommand(0, 0)
    try:
        bearing = relative_bearing(pose, target)
    except DegenerateGeometryError:
        return DriveCommand(0, 0)
    turn = 1 if bearing > TURN_DEADBAND_RAD else -1 if bearing < -TURN_DEADBAND_RAD else 0
    forward = 1 if abs(bearing) < FORWARD_CONE_RAD else 0
    return DriveCommand(forward, turn)


def _unit(dx: float, dy: float) -> tuple[float, float]:
    n = math.hypot(dx, dy)
    if n == 0.0:
        return (0.0, 0.0)
    return (dx / n, dy / n)


def follow_target(leader: Pose2D, gap_m: float) -> tuple[float, float]:
    """Point a follower should hold: gap_m behind the leader along its heading."""
    return (
        leader.x - gap_m * math.cos(leader.heading),
        leader.y - gap_m * math.sin(leader.heading),
    )


@dataclass
class RouteProgress:
    """Waypoint bookkeeping shared by the two leader variants."""

    route: tuple[str, ...]
    boards: Mapping[str, Board]
    dwell_ms: int = 0
    index: int = 0
    offsets: tuple[tuple[float, float], ...] = ()

    @classmethod
    def create(cls, route: tuple[str, ...], boards: Mapping[str, Board], rng: random.Random) -> "RouteProgress":
        # Per-waypoint approach offsets give each seed its own path while
        # staying inside the visit radius.
        offsets = tuple(
            (rng.uniform(-0.35, 0.35), rng.uniform(-0.35, 0.35)) for _ in route
        )
        return cls(route=route, boards=dict(boards), offsets=offsets)

    @property
    def done(self) -> bool:
        return self.index >= len(self.route)

    def current_board(self) -> Board:
        return self.boards[self.route[self.index]]

    def goal_point(self) -> tuple[float, float]:
        board = self.current_board()
        ox, oy = self.offsets[self.index]
        return (board.pose.x + ox, board.pose.y + oy)

    def snapshot(self) -> dict[str, Any]:
        return {"index": self.index, "dwell_ms": self.dwell_ms}


@dataclass
class AgentLeader:
    """Local user leading the tour: walk the route, dwell to explain, point.

    While traveling, pauses whenever the partner's reported distance
    exceeds lag_gap_m; without indicator data (partner_distance None) it
    never pauses.
    """

    cfg: SimConfig
    progress: RouteProgress
    walk_speed: float

    def step(
        self,
        me: tuple[float, float],
        partner_distance: float | None,
        dt_ms: int,
    ) -> tuple[float, float, str | None, bool]:
        """Advance one tick; returns (vx, vy, pointing_board_id, done)."""
        if self.progress.done:
            return (0.0, 0.0, None, True)
        board = self.progress.current_board()
        if distance(me, (board.pose.x, board.pose.y)) <= board.visit_radius:
            self.progress.dwell_ms += dt_ms
            pointing = board.id if self.progress.dwell_ms <= self.cfg.point_s * 1000.0 else None
            if self.progress.dwell_ms >= self.cfg.dwell_s * 1000.0:
                self.progress.index += 1
                self.progress.dwell_ms = 0
            return (0.0, 0.0, pointing, self.progress.done)
        if partner_distance is not None and partner_distance > self.cfg.lag_gap_m:
            return (0.0, 0.0, None, False)  # wait for the partner to close up
        gx, gy = self.progress.goal_point()
        ux, uy = _unit(gx - me[0], gy - me[1])
        return (self.walk_speed * ux, self.walk_speed * uy, None, False)

    def snapshot(self) -> dict[str, Any]:
        return {"kind": "agent_leader", **self.progress.snapshot()}


@dataclass
class AgentFollower:
    """Local user following the robot: pure pursuit of a point behind the leader."""

    cfg: SimConfig
    walk_speed: float

    def step(self, me: tuple[float, float], leader: Pose2D) -> tuple[float, float]:
        target = follow_target(leader, self.cfg.target_gap_m)
        dx, dy = target[0] - me[0], target[1] - me[1]
        gap_err = math.hypot(dx, dy)
        speed = min(self.walk_speed, gap_err)  # proportional, capped
        if gap_err < 0.05:
            return (0.0, 0.0)
        ux, uy = _unit(dx, dy)
        return (speed * ux, speed * uy)

    def snapshot(self) -> dict[str, Any]:
        return {"kind": "agent_follower"}


@dataclass
class RobotLeader:
    """Scripted operator leading the tour by driving the robot.

    Emits a click request when a dwell starts so the remote side can place
    a reference ray on the board being presented.
    """

    cfg: SimConfig
    progress: RouteProgress
    _was_dwelling: bool = False

    def step(
        self,
        robot: RobotState,
        partner_distance: float | None,
        dt_ms: int,
    ) -> tuple[DriveCommand, str | None, bool]:
        """Advance one tick; returns (command, click_board_id, done)."""
        if self.progress.done:
            return (DriveCommand(0, 0), None, True)
        board = self.progress.current_board()
        if distance(robot.pose.position, (board.pose.x, board.pose.y)) <= board.visit_radius:
            dwell_start = not self._was_dwelling
            self._was_dwelling = True
            self.progress.dwell_ms += dt_ms
            if self.progress.dwell_ms >= self.cfg.dwell_s * 1000.0:
                self.progress.index += 1
                self.progress.dwell_ms = 0
                self._was_dwelling = False
            return (DriveCommand(0, 0), board.id if dwell_start else None, self.progress.done)
        self._was_dwelling = False
        if partner_distance is not None and partner_distance > self.cfg.lag_gap_m:
            return (DriveCommand(0, 0), None, False)
        return (pilot_command(robot.pose, self.progress.goal_point(), stop_radius=0.05), None, False)

    def snapshot(self) -> dict[str, Any]:
        return {"kind": "robot_leader", "was_dwelling": self._was_dwelling, **self.progress.snapshot()}


@dataclass
class RobotFollower:
    """Scripted operator keeping the robot behind the walking leader.

    aware=True models the indicator condition: the partner's pose is always
    known. aware=False models the plain camera: the pursuit target freezes
    at the last in-FOV sighting, and after losing sight for a while with
    the stale point reached, the operator spins the robot to search, which
    is what operators of plain telepresence robots end up doing.
    """

    cfg: SimConfig
    aware: bool
    last_seen: Pose2D | None = None
    unseen_ms: int = 0

    def step(self, robot: RobotState, leader: Pose2D, dt_ms: int) -> DriveCommand:
        visible = in_fov(robot.cam, robot.pose, leader.position)
        if visible:
            self.last_seen = leader
            self.unseen_ms = 0
        else:
            self.unseen_ms += dt_ms

        known = leader if self.aware else self.last_seen
        if known is None:
            return DriveCommand(0, 1)  # never seen yet: scan for the partner
        target = follow_target(known, self.cfg.target_gap_m)
        searching = (
            not self.aware
            and not visible
            and self.unseen_ms >= self.cfg.search_after_s * 1000.0
            and distance(robot.pose.position, target) <= 0.4
        )
        if searching:
            return DriveCommand(0, 1)
        return pilot_command(robot.pose, target)

    def snapshot(self) -> dict[str, Any]:
        seen = None
        if self.last_seen is not None:
            seen = [self.last_seen.x, self.last_seen.y, self.last_seen.heading]
        return {"kind": "robot_follower", "aware": self.aware, "last_seen": seen, "unseen_ms": self.unseen_ms}
