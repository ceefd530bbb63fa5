"""Deterministic fixed-timestep world: arena, robot, scripted local user.

The tick loop is single-threaded and the sole owner of world state.
Protocol endpoints interact only through message lists passed into tick()
and returned from it; given the same (scenario, seed, inbound log) the
final world-state hash is identical on every run.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from typing import Any, Sequence

from . import protocol
from .awareness import MovementClassifier, MovementState, compute_indicator
from .config import SimConfig, TICK_DT_S, TICK_MS
from .errors import DegenerateGeometryError, ScreenRangeError
from .geometry import FloorRay, Pose2D, distance, in_fov, relative_bearing, screen_to_azimuth, world_to_screen
from .kinematics import CameraModel, DriveCommand, RobotState, TapEvent, apply_tap, set_pan_tilt, step_drive
from .policies import AgentFollower, AgentLeader, RobotFollower, RobotLeader, RouteProgress
from .protocol import Envelope, SequenceAllocator
from .scenario import LOCAL, Scenario
from .sharedref import (
    GestureDebouncer,
    PointingReference,
    RefSource,
    ReferenceRegistry,
    click_to_floor_ray,
    detect_pointing,
)
from .synth import synth_skeleton

# Positions and headings are snapped to this many decimals after every
# integration step so replay hashes do not depend on accumulated rounding.
QUANT_DECIMALS = 12

# Scripted tap trigger: partner close behind and invisible for this long.
TAP_NEAR_M = 0.9
TAP_UNSEEN_S = 2.0


def _q(value: float) -> float:
    return round(value, QUANT_DECIMALS)


def _qpose(pose: Pose2D) -> Pose2D:
    return Pose2D(_q(pose.x), _q(pose.y), _q(pose.heading))


class World:
    """Mutable simulation state advanced by tick()."""

    def __init__(self, scenario: Scenario, cfg: SimConfig | None = None, live_operator: bool = False):
        self.scenario = scenario
        self.cfg = cfg or SimConfig()
        self.teleaware = scenario.teleaware
        self.live_operator = live_operator

        rng = random.Random(scenario.seed)
        self.robot = RobotState(pose=_qpose(_jitter_pose(scenario.robot_start, rng, scenario)), cam=CameraModel())
        self.agent = _qpose(_jitter_pose(scenario.local_start, rng, scenario))
        self.agent_speed = 0.0
        walk_speed = self.cfg.walk_speed * rng.uniform(0.9, 1.1)

        boards = {b.id: b for b in scenario.boards}
        self.agent_leader: AgentLeader | None = None
        self.agent_follower: AgentFollower | None = None
        self.robot_leader: RobotLeader | None = None
        self.robot_follower: RobotFollower | None = None
        if scenario.leader == LOCAL:
            self.agent_leader = AgentLeader(self.cfg, RouteProgress.create(scenario.route, boards, rng), walk_speed)
            if not live_operator:
                self.robot_follower = RobotFollower(self.cfg, aware=self.teleaware)
        else:
            if not live_operator:
                self.robot_leader = RobotLeader(self.cfg, RouteProgress.create(scenario.route, boards, rng))
            self.agent_follower = AgentFollower(self.cfg, walk_speed)

        self.classifier = MovementClassifier(self.cfg.window_s, self.cfg.move_hi_mps, self.cfg.move_lo_mps)
        self.movement = MovementState.STATIONARY
        self.debouncer = GestureDebouncer(
            fps=1.0 / TICK_DT_S, n_consecutive=self.cfg.debounce_frames, ttl_s=self.cfg.gesture_ttl_s
        )
        self.refs = ReferenceRegistry()
        self.keys = {"w": False, "a": False, "s": False, "d": False}

        self.tick_count = 0
        self.sim_time_ms = 0
        self.seq = SequenceAllocator()
        self._telemetry_interval_ms = max(1, round(1000.0 / self.cfg.telemetry_hz))
        self._telemetry_due_ms = 0
        self._agent_unseen_ms = 0
        self._tap_ready_ms = 0
        self.done = False
        self.completed_tick: int | None = None
        self.pose_records: list[tuple[int, float, float, float, float, float, float]] = []
        self._active_touch_line: tuple[tuple[float, float], tuple[float, float]] | None = None

    # ------------------------------------------------------------------
    # Tick
    # ------------------------------------------------------------------

    def tick(self, inbound: Sequence[Envelope] = ()) -> list[Envelope]:
        """Advance the world exactly one 20 ms step.

        Applies delivered messages, runs the scripted behaviors, integrates
        motion, updates awareness state and reference TTLs, and returns the
        telemetry/event envelopes emitted this tick.
        """
        out: list[Envelope] = []
        now_s = self.sim_time_ms / 1000.0

        for env in inbound:
            self._apply_inbound(env, out)

        robot_cmd, agent_v, pointing_board, click_board = self._run_behaviors()

        if click_board is not None and self.teleaware:
            self._click_board(click_board, now_s, out)
        self._maybe_tap(out, now_s)

        # Integrate motion; the arena walls clamp, headings stay untouched.
        self.robot = step_drive(self.robot, robot_cmd, TICK_DT_S, self.cfg)
        rx, ry = self.scenario.arena.clamp(self.robot.pose.x, self.robot.pose.y)
        self.robot = RobotState(
            pose=_qpose(Pose2D(rx, ry, self.robot.pose.heading)),
            cam=self.robot.cam,
            linear_speed=self.robot.linear_speed,
            angular_speed=self.robot.angular_speed,
            rotation_goal=self.robot.rotation_goal,
        )

        prev_agent = self.agent
        ax = prev_agent.x + agent_v[0] * TICK_DT_S
        ay = prev_agent.y + agent_v[1] * TICK_DT_S
        ax, ay = self.scenario.arena.clamp(ax, ay)
        heading = prev_agent.heading
        if agent_v[0] != 0.0 or agent_v[1] != 0.0:
            heading = math.atan2(agent_v[1], agent_v[0])
        self.agent = _qpose(Pose2D(ax, ay, heading))
        self.agent_speed = _q(distance(prev_agent.position, self.agent.position) / TICK_DT_S)

        self.tick_count += 1
        self.sim_time_ms += TICK_MS
        now_s = self.sim_time_ms / 1000.0

        self.movement = self.classifier.update(self.agent_speed, self.sim_time_ms)
        if self.teleaware:
            self._gesture_pipeline(pointing_board, now_s)
        self.refs.expire(now_s)

        if self.sim_time_ms >= self._telemetry_due_ms:
            self._telemetry_due_ms += self._telemetry_interval_ms
            self._emit_telemetry(out)

        self.pose_records.append(
            (
                self.tick_count,
                self.robot.pose.x,
                self.robot.pose.y,
                self.robot.pose.heading,
                self.agent.x,
                self.agent.y,
                self.agent.heading,
            )
        )
        return out

    # ------------------------------------------------------------------
    # Inbound handling
    # ------------------------------------------------------------------

    def _apply_inbound(self, env: Envelope, out: list[Envelope]) -> None:
        kind = env.kind
        p = env.payload
        if env.channel == protocol.CTRL and self.live_operator:
            # Flush telemetry on operator input so the console sees the
            # effect within one tick instead of waiting out the 20 Hz cycle.
            self._telemetry_due_ms = self.sim_time_ms
        if kind == "drive_keys":
            for key in ("w", "a", "s", "d"):
                self.keys[key] = bool(p.get(key, False))
        elif kind == "pan_tilt":
            if self.teleaware:
                self.robot = set_pan_tilt(self.robot, float(p["pan_rad"]), float(p["tilt_rad"]))
        elif kind == "click":
            if self.teleaware:
                now_s = self.sim_time_ms / 1000.0
                try:
                    ref = click_to_floor_ray(self.robot, float(p["u_px"]), now_s, self.cfg)
                except ScreenRangeError:
                    return  # out-of-image click: nothing to project
                self.refs.set(ref)
                out.append(self._event_env(protocol.gesture_ref(ref, round(ref.expires_at() * 1000.0))))
        elif kind == "tap":
            if self.teleaware:
                tapped = apply_tap(self.robot, TapEvent(p["side"], self.sim_time_ms / 1000.0), self.cfg)
                if tapped.rotation_goal != self.robot.rotation_goal:
                    out.append(self._event_env(protocol.tap(p["side"])))
                self.robot = tapped
        # session envelopes are connection plumbing, handled by the server

    # ------------------------------------------------------------------
    # Behaviors
    # ------------------------------------------------------------------

    def _keys_command(self) -> DriveCommand:
        return DriveCommand(
            forward=int(self.keys["w"]) - int(self.keys["s"]),
            turn=int(self.keys["a"]) - int(self.keys["d"]),
        )

    def _partner_distance(self) -> float | None:
        """Separation as reported by the indicator; None when stripped."""
        if not self.teleaware:
            return None
        return distance(self.robot.pose.position, self.agent.position)

    def _run_behaviors(self) -> tuple[DriveCommand, tuple[float, float], str | None, str | None]:
        robot_cmd = DriveCommand(0, 0)
        agent_v = (0.0, 0.0)
        pointing_board: str | None = None
        click_board: str | None = None
        done = self.done

        if self.agent_leader is not None:
            vx, vy, pointing_board, done = self.agent_leader.step(
                self.agent.position, self._partner_distance(), TICK_MS
            )
            agent_v = (vx, vy)
        elif self.agent_follower is not None:
            agent_v = self.agent_follower.step(self.agent.position, self.robot.pose)

        if self.live_operator:
            robot_cmd = self._keys_command()
        elif self.robot_follower is not None:
            robot_cmd = self.robot_follower.step(self.robot, self.agent, TICK_MS)
        elif self.robot_leader is not None:
            robot_cmd, click_board, done = self.robot_leader.step(
                self.robot, self._partner_distance(), TICK_MS
            )

        if done and not self.done:
            self.done = True
            self.completed_tick = self.tick_count + 1  # route completes on this tick
        return robot_cmd, agent_v, pointing_board, click_board

    def _click_board(self, board_id: str, now_s: float, out: list[Envelope]) -> None:
        """Scripted operator clicks the presented board to project a reference ray."""
        board = self.scenario.board(board_id)
        projected = world_to_screen(self.robot.cam, self.robot.pose, (board.pose.x, board.pose.y))
        if projected is None:
            return
        ref = click_to_floor_ray(self.robot, projected[0], now_s, self.cfg)
        self.refs.set(ref)
        out.append(self._event_env(protocol.gesture_ref(ref, round(ref.expires_at() * 1000.0))))

    def _maybe_tap(self, out: list[Envelope], now_s: float) -> None:
        """Local user taps the robot's shoulder when hovering unseen behind it."""
        if not self.teleaware:
            return
        visible = in_fov(self.robot.cam, self.robot.pose, self.agent.position)
        if visible:
            self._agent_unseen_ms = 0
            return
        self._agent_unseen_ms += TICK_MS
        close = distance(self.robot.pose.position, self.agent.position) <= TAP_NEAR_M
        ready = self.sim_time_ms >= self._tap_ready_ms
        if close and ready and self._agent_unseen_ms >= TAP_UNSEEN_S * 1000.0 and self.robot.rotation_goal is None:
            side = "left" if relative_bearing(self.robot.pose, self.agent.position) > 0.0 else "right"
            self.robot = apply_tap(self.robot, TapEvent(side, now_s), self.cfg)
            self._tap_ready_ms = self.sim_time_ms + round(self.cfg.tap_cooldown_s * 1000.0)
            out.append(self._event_env(protocol.tap(side)))

    def _gesture_pipeline(self, pointing_board: str | None, now_s: float) -> None:
        """Skeleton synthesis -> pointing detection -> debounce -> shared reference."""
        target = None
        if pointing_board is not None:
            board = self.scenario.board(pointing_board)
            target = (board.pose.x, board.pose.y)
        skel = synth_skeleton(self.agent.position, target, self.robot.cam, self.robot.pose, self.cfg.head_row_frac)
        detection = None
        if skel is not None:
            for side in ("right", "left"):
                detection = detect_pointing(skel, side, self.cfg.elbow_min_deg)
                if detection is not None:
                    break
        stable = self.debouncer.update(detection, now_s)
        if stable is None:
            self.refs.clear(RefSource.LOCAL_GESTURE)
            self._active_touch_line = None
            return
        border_u = min(max(stable.touch_line[1][0], 0.0), float(self.robot.cam.image_width))
        azimuth = screen_to_azimuth(self.robot.cam, self.robot.pose, border_u)
        ray = FloorRay(
            origin_x=self.robot.pose.x,
            origin_y=self.robot.pose.y,
            azimuth=azimuth,
            extent=self.cfg.ray_extent_m,
            ttl=self.cfg.gesture_ttl_s,
        )
        self.refs.set(
            PointingReference(
                source=RefSource.LOCAL_GESTURE,
                ray=ray,
                created_at=now_s,
                display_ttl=self.cfg.gesture_ttl_s,
            )
        )
        self._active_touch_line = stable.touch_line

    # ------------------------------------------------------------------
    # Outbound telemetry
    # ------------------------------------------------------------------

    def _telemetry_env(self, payload: dict[str, Any]) -> Envelope:
        return Envelope(protocol.TELEMETRY, self.seq.next(protocol.TELEMETRY), self.sim_time_ms, payload)

    def _event_env(self, payload: dict[str, Any]) -> Envelope:
        return Envelope(protocol.EVENT, self.seq.next(protocol.EVENT), self.sim_time_ms, payload)

    def _emit_telemetry(self, out: list[Envelope]) -> None:
        out.append(
            self._telemetry_env(
                protocol.tracker_pose("robot", self.robot.pose.x, self.robot.pose.y, self.robot.pose.heading)
            )
        )
        out.append(
            self._telemetry_env(
                protocol.tracker_pose("local", self.agent.x, self.agent.y, self.agent.heading)
            )
        )
        if not self.teleaware:
            return
        try:
            ind = compute_indicator(self.robot, self.agent.position, self.movement, self.cfg.head_row_frac)
        except DegenerateGeometryError:
            ind = None  # coincident poses: skip the indicator this frame
        if ind is not None:
            out.append(self._telemetry_env(protocol.indicator(ind)))
        for ref in self.refs.active():
            touch = None
            if ref.source == RefSource.LOCAL_GESTURE:
                touch = self._active_touch_line
                expires_ms = round((self.debouncer.last_seen + self.cfg.gesture_ttl_s) * 1000.0)
            else:
                expires_ms = round(ref.expires_at() * 1000.0)
            out.append(self._event_env(protocol.gesture_ref(ref, expires_ms, touch)))

    # ------------------------------------------------------------------
    # State digest
    # ------------------------------------------------------------------

    @property
    def task_time_s(self) -> float | None:
        if self.completed_tick is None:
            return None
        return self.completed_tick * TICK_DT_S

    def snapshot(self) -> dict[str, Any]:
        """Canonical view of everything that drives future evolution."""
        brains = [
            b.snapshot()
            for b in (self.agent_leader, self.agent_follower, self.robot_leader, self.robot_follower)
            if b is not None
        ]
        return {
            "tick": self.tick_count,
            "t_ms": self.sim_time_ms,
            "robot": {
                "x": self.robot.pose.x,
                "y": self.robot.pose.y,
                "heading": self.robot.pose.heading,
                "pan": self.robot.cam.pan,
                "tilt": self.robot.cam.tilt,
                "v": _q(self.robot.linear_speed),
                "w": _q(self.robot.angular_speed),
                "goal": self.robot.rotation_goal,
            },
            "agent": {
                "x": self.agent.x,
                "y": self.agent.y,
                "heading": self.agent.heading,
                "speed": self.agent_speed,
            },
            "movement": self.movement.value,
            "keys": dict(self.keys),
            "refs": [
                {
                    "source": r.source.value,
                    "x": r.ray.origin_x,
                    "y": r.ray.origin_y,
                    "azimuth": _q(r.ray.azimuth),
                    "extent": r.ray.extent,
                    "created": _q(r.created_at),
                }
                for r in self.refs.active()
            ],
            "brains": brains,
            "done": self.done,
            "completed_tick": self.completed_tick,
            "telemetry_due": self._telemetry_due_ms,
            "unseen_ms": self._agent_unseen_ms,
            "tap_ready_ms": self._tap_ready_ms,
        }

    def state_hash(self) -> str:
        """SHA-256 over the canonical JSON snapshot; the replay identity."""
        text = json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":"), allow_nan=False)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _jitter_pose(pose: Pose2D, rng: random.Random, scenario: Scenario) -> Pose2D:
    """Per-seed start variation: small translation and heading offset."""
    x = pose.x + rng.uniform(-0.25, 0.25)
    y = pose.y + rng.uniform(-0.25, 0.25)
    heading = pose.heading + rng.uniform(-math.radians(10.0), math.radians(10.0))
    x, y = scenario.arena.clamp(x, y)
    return Pose2D(x, y, heading)
