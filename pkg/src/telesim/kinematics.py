"""Robot motion: WASD drive integration, pan-tilt actuation, shoulder-tap rotation.

All operations are pure state transitions on an immutable RobotState; the
sim loop is the single writer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .config import SimConfig
from .geometry import CameraModel, Pose2D, wrap_angle

LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class DriveCommand:
    """Discrete drive input derived from W/S (forward) and A/D (turn) key states.

    forward and turn each take values in {-1, 0, +1}; turn +1 is a left
    (counterclockwise) turn.
    """

    forward: int = 0
    turn: int = 0

    def __post_init__(self):
        if self.forward not in (-1, 0, 1) or self.turn not in (-1, 0, 1):
            raise ValueError(f"drive command components must be -1, 0 or +1: {self}")

    @property
    def idle(self) -> bool:
        return self.forward == 0 and self.turn == 0


@dataclass(frozen=True)
class TapEvent:
    """A press on one of the two side force sensors."""

    side: str
    timestamp: float = 0.0

    def __post_init__(self):
        if self.side not in (LEFT, RIGHT):
            raise ValueError(f"tap side must be 'left' or 'right', got {self.side!r}")


@dataclass(frozen=True)
class RobotState:
    pose: Pose2D
    cam: CameraModel
    linear_speed: float = 0.0
    angular_speed: float = 0.0
    rotation_goal: float | None = None  # target heading while a tap rotation runs

    def __post_init__(self):
        if self.rotation_goal is not None:
            object.__setattr__(self, "rotation_goal", wrap_angle(self.rotation_goal))


def step_drive(state: RobotState, cmd: DriveCommand, dt: float, cfg: SimConfig | None = None) -> RobotState:
    """Advance the robot one timestep under a drive command (unicycle model).

    While a shoulder-tap rotation goal is active the rotation controller
    wins and manual input is suppressed, unless cfg.tap_cancelable is set,
    in which case any non-idle command aborts the rotation.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    cfg = cfg or SimConfig()

    if state.rotation_goal is not None:
        if cfg.tap_cancelable and not cmd.idle:
            state = replace(state, rotation_goal=None)
        else:
            return _step_rotation(state, dt, cfg)

    v = cmd.forward * cfg.v_max
    w = cmd.turn * cfg.omega_max
    pose = state.pose
    nx = pose.x + v * math.cos(pose.heading) * dt
    ny = pose.y + v * math.sin(pose.heading) * dt
    nh = wrap_angle(pose.heading + w * dt)
    return replace(state, pose=Pose2D(nx, ny, nh), linear_speed=v, angular_speed=w)


def _step_rotation(state: RobotState, dt: float, cfg: SimConfig) -> RobotState:
    """Turn in place toward the rotation goal at up to omega_max.

    The step toward the goal is saturated, so the heading lands exactly on
    the goal instead of oscillating; the goal clears once the residual
    error drops below rotation_done_deg.
    """
    goal = state.rotation_goal
    assert goal is not None
    err = wrap_angle(goal - state.pose.heading)
    max_step = cfg.omega_max * dt
    if abs(err) <= max_step:
        nh = goal
        w = err / dt
    else:
        w = math.copysign(cfg.omega_max, err)
        nh = wrap_angle(state.pose.heading + w * dt)
    remaining: float | None = goal
    if abs(wrap_angle(goal - nh)) < math.radians(cfg.rotation_done_deg):
        remaining = None
    pose = replace(state.pose, heading=nh)
    return replace(state, pose=pose, linear_speed=0.0, angular_speed=w, rotation_goal=remaining)


def apply_tap(state: RobotState, tap: TapEvent, cfg: SimConfig | None = None) -> RobotState:
    """React to a shoulder tap: set a rotation goal toward the pressed side.

    A tap on the left sensor turns the robot left (counterclockwise) by
    cfg.tap_angle_deg. Taps arriving while a rotation is already running
    are ignored.
    """
    if state.rotation_goal is not None:
        return state
    cfg = cfg or SimConfig()
    delta = math.radians(cfg.tap_angle_deg)
    if tap.side == RIGHT:
        delta = -delta
    return replace(state, rotation_goal=wrap_angle(state.pose.heading + delta))


def set_pan_tilt(state: RobotState, pan: float, tilt: float) -> RobotState:
    """Point the camera mount; out-of-range requests clamp, never error."""
    return replace(state, cam=state.cam.with_pan_tilt(pan, tilt))
