"""Partner indicator: in-view anchored icon vs out-of-view edge arrow, plus
stationary/moving classification with hysteresis."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import geometry
from .errors import InsufficientDataError
from .kinematics import RobotState


class MovementState(enum.Enum):
    STATIONARY = "stationary"
    MOVING = "moving"


@dataclass(frozen=True)
class InView:
    """Icon anchored above the partner's head on the operator's screen."""

    u: float
    v: float


@dataclass(frozen=True)
class OutOfView:
    """Edge arrow shown when the partner is in a camera blind spot.

    edge_u is the horizontal image edge on the partner's side (0 for left,
    image width for right); arrow_bearing is the pan-corrected relative
    bearing the arrow rotates to.
    """

    edge_u: float
    arrow_bearing: float


@dataclass(frozen=True)
class PartnerIndicator:
    mode: InView | OutOfView
    distance_m: float
    movement: MovementState

    @property
    def distance_text(self) -> str:
        """Distance label rounded to 0.1 m for display."""
        return f"{round(self.distance_m, 1):.1f} m"


def classify_movement(
    speed_window: Sequence[tuple[float, float]],
    previous: MovementState = MovementState.STATIONARY,
    hi: float = 0.20,
    lo: float = 0.10,
) -> MovementState:
    """Classify a window of (speed m/s, timestamp) samples.

    Mean speed >= hi reports Moving, <= lo reports Stationary; inside the
    band the previous state is retained, which keeps the display from
    flickering at walking-pace boundaries.
    """
    if not speed_window:
        raise InsufficientDataError("empty speed window")
    mean = sum(s for s, _ in speed_window) / len(speed_window)
    if mean >= hi:
        return MovementState.MOVING
    if mean <= lo:
        return MovementState.STATIONARY
    return previous


class MovementClassifier:
    """Stateful wrapper around classify_movement, owned by the sim loop.

    Accumulates per-tick speed samples; classification starts once the
    window spans window_s seconds and until then retains the initial state.
    """

    def __init__(self, window_s: float = 0.5, hi: float = 0.20, lo: float = 0.10):
        if window_s <= 0.0:
            raise ValueError("window_s must be positive")
        self.window_ms = round(window_s * 1000.0)
        self.hi = hi
        self.lo = lo
        self.state = MovementState.STATIONARY
        self._samples: deque[tuple[float, int]] = deque()

    def update(self, speed: float, t_ms: int) -> MovementState:
        self._samples.append((speed, t_ms))
        cutoff = t_ms - self.window_ms
        while self._samples and self._samples[0][1] < cutoff:
            self._samples.popleft()
        if self._samples[-1][1] - self._samples[0][1] >= self.window_ms:
            self.state = classify_movement(self._samples, self.state, self.hi, self.lo)
        return self.state


def compute_indicator(
    robot: RobotState,
    partner: tuple[float, float],
    movement: MovementState,
    head_row_frac: float = geometry.DEFAULT_HEAD_ROW_FRAC,
) -> PartnerIndicator:
    """Build the partner indicator for the operator's screen.

    In FOV: icon anchored at the partner's projected head position.
    Out of FOV: arrow pinned to the image edge on the partner's side,
    rotated to the pan-corrected bearing. Distance rides along in both
    modes.
    """
    cam = robot.cam
    pose = robot.pose
    dist = geometry.distance(pose.position, partner)
    beta = geometry.camera_bearing(cam, pose, partner)
    mode: InView | OutOfView
    if abs(beta) <= cam.half_fov:
        anchor = geometry.world_to_screen(cam, pose, partner, head_row_frac)
        assert anchor is not None  # |beta| <= hfov/2 guarantees projection
        mode = InView(u=anchor[0], v=anchor[1])
    else:
        edge_u = 0.0 if beta > 0.0 else float(cam.image_width)
        mode = OutOfView(edge_u=edge_u, arrow_bearing=beta)
    return PartnerIndicator(mode=mode, distance_m=dist, movement=movement)


def mean_speed(samples: Iterable[tuple[float, float]]) -> float:
    """Arithmetic mean of the speed components of (speed, timestamp) samples."""
    total = 0.0
    n = 0
    for s, _ in samples:
        total += s
        n += 1
    if n == 0:
        raise InsufficientDataError("empty speed window")
    return total / n
