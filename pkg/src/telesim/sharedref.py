"""Shared referencing: pointing-gesture detection from skeleton keypoints,
visual-touch-line extrapolation, and remote click to floor ray."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .config import SimConfig
from .geometry import FloorRay, screen_to_azimuth
from .kinematics import RobotState

# Keypoints below this confidence are treated as missing.
MIN_KEYPOINT_CONF = 0.5

# Hip line fallback when hip keypoints are absent: hips sit about twice the
# head-to-shoulder drop below the shoulders.
HIP_DROP_RATIO = 2.0


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    confidence: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class Skeleton:
    """Image-plane body keypoints with per-point confidence.

    Expected names: head, left/right_shoulder, left/right_elbow,
    left/right_wrist, optionally left/right_fingertip and left/right_hip.
    """

    points: Mapping[str, Keypoint]
    image_width: float
    image_height: float

    def get(self, name: str, min_conf: float = MIN_KEYPOINT_CONF) -> Keypoint | None:
        kp = self.points.get(name)
        if kp is None or kp.confidence < min_conf:
            return None
        return kp


@dataclass(frozen=True)
class PointingGesture:
    side: str
    elbow_angle_deg: float
    touch_line: tuple[tuple[float, float], tuple[float, float]]


class RefSource(enum.Enum):
    LOCAL_GESTURE = "local_gesture"
    REMOTE_CLICK = "remote_click"


@dataclass(frozen=True)
class PointingReference:
    """A shared floor ray: at most one active reference per source."""

    source: RefSource
    ray: FloorRay
    created_at: float
    display_ttl: float

    def __post_init__(self):
        if self.display_ttl <= 0.0:
            raise ValueError("display_ttl must be positive")

    def expires_at(self) -> float:
        return self.created_at + self.display_ttl


def _angle_at(vertex: Keypoint, a: Keypoint, b: Keypoint) -> float | None:
    """Interior angle at vertex between rays toward a and b, in degrees."""
    ax, ay = a.x - vertex.x, a.y - vertex.y
    bx, by = b.x - vertex.x, b.y - vertex.y
    na = math.hypot(ax, ay)
    nb = math.hypot(bx, by)
    if na == 0.0 or nb == 0.0:
        return None
    cos = (ax * bx + ay * by) / (na * nb)
    cos = max(-1.0, min(1.0, cos))
    return math.degrees(math.acos(cos))


def _extend_to_border(
    origin: tuple[float, float],
    through: tuple[float, float],
    width: float,
    height: float,
) -> tuple[float, float] | None:
    """Point where the ray origin->through exits the image rectangle."""
    dx = through[0] - origin[0]
    dy = through[1] - origin[1]
    if dx == 0.0 and dy == 0.0:
        return None
    t_exit = math.inf
    if dx > 0.0:
        t_exit = min(t_exit, (width - origin[0]) / dx)
    elif dx < 0.0:
        t_exit = min(t_exit, (0.0 - origin[0]) / dx)
    if dy > 0.0:
        t_exit = min(t_exit, (height - origin[1]) / dy)
    elif dy < 0.0:
        t_exit = min(t_exit, (0.0 - origin[1]) / dy)
    if not math.isfinite(t_exit) or t_exit <= 0.0:
        return None
    return (origin[0] + t_exit * dx, origin[1] + t_exit * dy)


def _hip_line_y(skel: Skeleton) -> float | None:
    hips = [kp for name in ("left_hip", "right_hip") if (kp := skel.get(name))]
    if hips:
        return sum(kp.y for kp in hips) / len(hips)
    head = skel.get("head")
    shoulders = [kp for name in ("left_shoulder", "right_shoulder") if (kp := skel.get(name))]
    if head is None or not shoulders:
        return None
    shoulder_y = sum(kp.y for kp in shoulders) / len(shoulders)
    return shoulder_y + HIP_DROP_RATIO * (shoulder_y - head.y)


def detect_pointing(
    skel: Skeleton,
    side: str,
    elbow_min_deg: float = 160.0,
) -> PointingGesture | None:
    """Detect an extended-arm pointing gesture on the given side.

    Fires when the shoulder-elbow-wrist angle is at least elbow_min_deg
    (boundary inclusive) and the wrist is raised above the hip line. The
    reported touch line runs from the head keypoint through the fingertip
    (wrist as fallback), extrapolated to the image border: the line an
    observer should follow to read the gesture, not the arm line.

    Missing or low-confidence keypoints yield None, never an error. The
    decision depends only on angles and proportions, so it is invariant
    under uniform scaling and translation of the keypoints.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    shoulder = skel.get(f"{side}_shoulder")
    elbow = skel.get(f"{side}_elbow")
    wrist = skel.get(f"{side}_wrist")
    head = skel.get("head")
    if shoulder is None or elbow is None or wrist is None or head is None:
        return None

    angle = _angle_at(elbow, shoulder, wrist)
    if angle is None or angle < elbow_min_deg:
        return None

    hip_y = _hip_line_y(skel)
    if hip_y is None or wrist.y >= hip_y:  # image y grows downward
        return None

    tip = skel.get(f"{side}_fingertip") or wrist
    border = _extend_to_border((head.x, head.y), (tip.x, tip.y), skel.image_width, skel.image_height)
    if border is None:
        return None
    return PointingGesture(side=side, elbow_angle_deg=angle, touch_line=((head.x, head.y), border))


class GestureDebouncer:
    """Turns per-frame detections into a stable gesture with display persistence.

    A gesture activates after n_consecutive detected frames; once active,
    the touch line persists for ttl_s after the last detection so the
    operator has time to read it, then deactivates and the count starts
    over.
    """

    def __init__(self, fps: float, n_consecutive: int = 5, ttl_s: float = 3.0):
        if fps <= 0.0:
            raise ValueError("fps must be positive")
        if n_consecutive < 1:
            raise ValueError("n_consecutive must be >= 1")
        self.fps = fps
        self.n_consecutive = n_consecutive
        self.ttl_s = ttl_s
        self._streak = 0
        self._active: PointingGesture | None = None
        self._last_seen: float = -math.inf

    @property
    def last_seen(self) -> float:
        return self._last_seen

    def update(self, detection: PointingGesture | None, now_s: float) -> PointingGesture | None:
        """Feed one frame; returns the currently active stable gesture, if any."""
        if detection is not None:
            self._streak += 1
            if self._active is not None or self._streak >= self.n_consecutive:
                self._active = detection
                self._last_seen = now_s
        else:
            self._streak = 0
        if self._active is not None and now_s - self._last_seen > self.ttl_s:
            self._active = None
        return self._active


def debounce_gesture(
    frames: Iterable[PointingGesture | None],
    fps: float,
    n_consecutive: int = 5,
    ttl_s: float = 3.0,
) -> Iterator[PointingGesture | None]:
    """Run a frame sequence through a GestureDebouncer at a fixed frame rate."""
    deb = GestureDebouncer(fps, n_consecutive, ttl_s)
    for i, det in enumerate(frames):
        yield deb.update(det, i / fps)


def click_to_floor_ray(
    robot: RobotState,
    u: float,
    now_s: float,
    cfg: SimConfig | None = None,
) -> PointingReference:
    """Turn a remote screen click into a projected floor ray.

    The ray starts at the robot base and runs along the world azimuth of
    the clicked image column (projector co-located with the main camera).
    Raises ScreenRangeError for u outside the image.
    """
    cfg = cfg or SimConfig()
    azimuth = screen_to_azimuth(robot.cam, robot.pose, u)
    ray = FloorRay(
        origin_x=robot.pose.x,
        origin_y=robot.pose.y,
        azimuth=azimuth,
        extent=cfg.ray_extent_m,
        ttl=cfg.click_ttl_s,
    )
    return PointingReference(
        source=RefSource.REMOTE_CLICK,
        ray=ray,
        created_at=now_s,
        display_ttl=cfg.click_ttl_s,
    )


@dataclass
class ReferenceRegistry:
    """Active shared references, at most one per source. Single writer: the sim loop."""

    _refs: dict[RefSource, PointingReference] = field(default_factory=dict)

    def set(self, ref: PointingReference) -> None:
        """Register a reference, replacing any previous one from the same source."""
        self._refs[ref.source] = ref

    def clear(self, source: RefSource) -> None:
        self._refs.pop(source, None)

    def expire(self, now_s: float) -> None:
        for source in [s for s, r in self._refs.items() if now_s >= r.expires_at()]:
            del self._refs[source]

    def get(self, source: RefSource) -> PointingReference | None:
        return self._refs.get(source)

    def active(self) -> list[PointingReference]:
        return [self._refs[s] for s in RefSource if s in self._refs]
