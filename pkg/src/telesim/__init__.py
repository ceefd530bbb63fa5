"""Deterministic networked simulation of an awareness-augmented telepresence robot.

The package couples a fixed-timestep world model (8x8 m exhibition arena,
differential-drive robot, scripted local user) to a small NDJSON wire
protocol, and reproduces the leader/follower visiting task as a
metrics-producing experiment harness with two feature conditions:
"teleaware" (partner indicator, shoulder tap, shared pointing references,
pan-tilt) and "standard" (camera and keyboard drive only).
"""

from .awareness import InView, MovementState, OutOfView, PartnerIndicator, classify_movement, compute_indicator
from .config import SimConfig, TICK_DT_S, TICK_MS, load_config
from .geometry import CameraModel, FloorRay, Pose2D, distance, in_fov, relative_bearing, screen_to_azimuth, world_to_screen
from .kinematics import DriveCommand, RobotState, TapEvent, apply_tap, set_pan_tilt, step_drive
from .metrics import MetricsReport, trajectory_overlap
from .protocol import Envelope, Link, LinkModel, decode, encode
from .runner import compare_conditions, metrics_from_log, replay, run_experiment
from .scenario import Arena, Board, Scenario, bundled_layout, load_scenario
from .sharedref import (
    GestureDebouncer,
    Keypoint,
    PointingGesture,
    PointingReference,
    RefSource,
    Skeleton,
    click_to_floor_ray,
    detect_pointing,
)
from .synth import synth_skeleton
from .world import World

__version__ = "0.1.0"
