"""Pure planar geometry: bearings, distances, FOV tests and screen mappings.

Conventions used everywhere in the simulator:
  - world frame: x right, y up, angles in radians, counterclockwise positive
  - headings and bearings normalized to (-pi, pi]
  - bearing 0 means dead ahead of the observer, positive means to the
    observer's left
  - image frame: u grows rightward in pixels, v downward; a target to the
    observer's left lands on the left half of the image (small u)

All functions are pure and safe to call from any thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DegenerateGeometryError, ScreenRangeError

TWO_PI = 2.0 * math.pi

# Coincident-point guard for bearing computations (meters).
MIN_SEPARATION_M = 1e-9

# Pan-tilt travel is symmetric about the forward axis: 343 deg total pan,
# 120 deg total tilt.
PAN_HALF_RANGE = math.radians(343.0 / 2.0)
TILT_HALF_RANGE = math.radians(120.0 / 2.0)

# Screen row (fraction of image height) where partner heads are anchored.
DEFAULT_HEAD_ROW_FRAC = 0.35


def wrap_angle(angle: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = angle % TWO_PI  # [0, 2*pi)
    if a > math.pi:
        a -= TWO_PI
    return a


def _clamp(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else hi if value > hi else value


@dataclass(frozen=True)
class Pose2D:
    """Planar position plus heading, heading normalized to (-pi, pi]."""

    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.heading)):
            raise ValueError(f"pose components must be finite: ({self.x}, {self.y}, {self.heading})")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class CameraModel:
    """Main-camera horizontal FOV plus the pan-tilt mount state and limits.

    Pan and tilt are always clamped into their ranges, never rejected.
    """

    hfov: float = TWO_PI / 3.0  # 120 deg wide-angle main camera
    pan: float = 0.0
    tilt: float = 0.0
    pan_range: tuple[float, float] = (-PAN_HALF_RANGE, PAN_HALF_RANGE)
    tilt_range: tuple[float, float] = (-TILT_HALF_RANGE, TILT_HALF_RANGE)
    image_width: int = 960
    image_height: int = 540

    def __post_init__(self):
        if not 0.0 < self.hfov < math.pi:
            raise ValueError(f"hfov must be in (0, pi), got {self.hfov}")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image dimensions must be positive")
        object.__setattr__(self, "pan", _clamp(self.pan, *self.pan_range))
        object.__setattr__(self, "tilt", _clamp(self.tilt, *self.tilt_range))

    @property
    def half_fov(self) -> float:
        return self.hfov / 2.0

    def with_pan_tilt(self, pan: float, tilt: float) -> "CameraModel":
        """Return a copy with the requested pan/tilt clamped into range."""
        return replace(
            self,
            pan=_clamp(pan, *self.pan_range),
            tilt=_clamp(tilt, *self.tilt_range),
        )


@dataclass(frozen=True)
class FloorRay:
    """A direction beam on the floor: origin at the robot base, world-frame azimuth."""

    origin_x: float
    origin_y: float
    azimuth: float
    extent: float
    ttl: float

    def __post_init__(self):
        if self.extent <= 0.0:
            raise ValueError(f"ray extent must be positive, got {self.extent}")
        object.__setattr__(self, "azimuth", wrap_angle(self.azimuth))


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Euclidean distance between two points."""
    return math.hypot(b[0] - a[0], b[1] - a[1])


def relative_bearing(observer: Pose2D, target: tuple[float, float]) -> float:
    """Bearing from the observer's heading to the target, in (-pi, pi].

    0 is dead ahead, positive is to the observer's left (counterclockwise).
    Raises DegenerateGeometryError for coincident points.
    """
    dx = target[0] - observer.x
    dy = target[1] - observer.y
    if math.hypot(dx, dy) <= MIN_SEPARATION_M:
        raise DegenerateGeometryError(
            f"observer and target coincide at ({observer.x}, {observer.y})"
        )
    return wrap_angle(math.atan2(dy, dx) - observer.heading)


def camera_bearing(cam: CameraModel, observer: Pose2D, target: tuple[float, float]) -> float:
    """Bearing of the target relative to the camera's optical axis (heading + pan)."""
    return wrap_angle(relative_bearing(observer, target) - cam.pan)


def in_fov(cam: CameraModel, observer: Pose2D, target: tuple[float, float]) -> bool:
    """True iff the target lies within the camera's horizontal FOV.

    The boundary is inclusive: a target at exactly +-hfov/2 counts as visible.
    """
    return abs(camera_bearing(cam, observer, target)) <= cam.half_fov


def world_to_screen(
    cam: CameraModel,
    observer: Pose2D,
    target: tuple[float, float],
    head_row_frac: float = DEFAULT_HEAD_ROW_FRAC,
) -> tuple[float, float] | None:
    """Project a world point to pixel coordinates on the camera image.

    Horizontal mapping is pinhole: u = (W/2) * (1 - tan(beta)/tan(hfov/2))
    where beta is the pan-corrected bearing (positive-left). The vertical
    coordinate is a fixed head-height row; the task is planar, so only the
    horizontal axis carries geometry. Returns None when the target is out
    of FOV.
    """
    beta = camera_bearing(cam, observer, target)
    if abs(beta) > cam.half_fov:
        return None
    u = (cam.image_width / 2.0) * (1.0 - math.tan(beta) / math.tan(cam.half_fov))
    v = head_row_frac * cam.image_height
    return (u, v)


def screen_to_azimuth(cam: CameraModel, observer: Pose2D, u: float) -> float:
    """World-frame azimuth of the viewing ray through image column u.

    Exact inverse of world_to_screen's horizontal mapping composed with the
    observer heading and camera pan. Raises ScreenRangeError for u outside
    [0, image_width].
    """
    if not 0.0 <= u <= cam.image_width:
        raise ScreenRangeError(f"u={u} outside image [0, {cam.image_width}]")
    beta = math.atan((1.0 - 2.0 * u / cam.image_width) * math.tan(cam.half_fov))
    return wrap_angle(observer.heading + cam.pan + beta)
