"""Synthetic image-plane skeletons for the scripted local user.

Stands in for a camera-frame pose estimator: keypoints are generated
directly from the world geometry through the same camera mapping the rest
of the system uses. A pointing skeleton has the arm keypoints collinear
toward the target's screen position (elbow angle 180 deg); an idle one has
the elbow bent at 90 deg.
"""

from __future__ import annotations

import math
import random

from .geometry import CameraModel, DEFAULT_HEAD_ROW_FRAC, Pose2D, camera_bearing, distance, world_to_screen
from .sharedref import Keypoint, Skeleton

# Body segment lengths in meters, projected with the camera's pixel scale.
HEAD_TO_SHOULDER_M = 0.30
SHOULDER_TO_HIP_M = 0.60
SHOULDER_HALF_M = 0.20
HIP_HALF_M = 0.15
UPPER_ARM_M = 0.28
FOREARM_M = 0.27
HAND_M = 0.07

# Pointing arms stay within 30 deg of horizontal so the wrist is always
# clearly above the hip line.
MAX_ARM_SLOPE = math.tan(math.radians(30.0))

MIN_RANGE_M = 0.5


def synth_skeleton(
    agent: tuple[float, float],
    pointing_at: tuple[float, float] | None,
    cam: CameraModel,
    robot_pose: Pose2D,
    head_row_frac: float = DEFAULT_HEAD_ROW_FRAC,
    rng: random.Random | None = None,
    noise_px: float = 0.0,
) -> Skeleton | None:
    """Generate the local user's skeleton as seen by the robot camera.

    Returns None when the agent is outside the camera FOV. pointing_at is
    a world point (board position) the figure points toward, or None for
    an idle stance. Gaussian pixel noise is added when noise_px > 0.
    """
    projected = world_to_screen(cam, robot_pose, agent, head_row_frac)
    if projected is None:
        return None
    u0, head_v = projected
    rng_m = distance(robot_pose.position, agent)
    focal_px = (cam.image_width / 2.0) / math.tan(cam.half_fov)
    ppm = focal_px / max(rng_m, MIN_RANGE_M)  # pixels per meter at the agent's range

    shoulder_v = head_v + HEAD_TO_SHOULDER_M * ppm
    hip_v = shoulder_v + SHOULDER_TO_HIP_M * ppm
    points: dict[str, Keypoint] = {
        "head": Keypoint(u0, head_v),
        "left_shoulder": Keypoint(u0 - SHOULDER_HALF_M * ppm, shoulder_v),
        "right_shoulder": Keypoint(u0 + SHOULDER_HALF_M * ppm, shoulder_v),
        "left_hip": Keypoint(u0 - HIP_HALF_M * ppm, hip_v),
        "right_hip": Keypoint(u0 + HIP_HALF_M * ppm, hip_v),
    }

    target_uv: tuple[float, float] | None = None
    if pointing_at is not None:
        target_uv = world_to_screen(cam, robot_pose, pointing_at, head_row_frac)
        if target_uv is None:
            # Target is off-screen: point toward its side of the image.
            side_sign = 1.0 if camera_bearing(cam, robot_pose, pointing_at) < 0.0 else -1.0
            target_uv = (u0 + side_sign * cam.image_width, shoulder_v)

    for side, sign in (("left", -1.0), ("right", 1.0)):
        shoulder = points[f"{side}_shoulder"]
        pointing_side = target_uv is not None and (
            (target_uv[0] >= u0 and sign > 0) or (target_uv[0] < u0 and sign < 0)
        )
        if pointing_side:
            du = target_uv[0] - shoulder.x
            dv = target_uv[1] - shoulder.y
            ex = 1.0 if du >= 0.0 else -1.0
            slope = 0.0 if du == 0.0 else max(-MAX_ARM_SLOPE, min(MAX_ARM_SLOPE, dv / abs(du)))
            norm = math.hypot(1.0, slope)
            dir_u, dir_v = ex / norm, slope / norm
            elbow = (shoulder.x + UPPER_ARM_M * ppm * dir_u, shoulder.y + UPPER_ARM_M * ppm * dir_v)
            wrist = (elbow[0] + FOREARM_M * ppm * dir_u, elbow[1] + FOREARM_M * ppm * dir_v)
            tip = (wrist[0] + HAND_M * ppm * dir_u, wrist[1] + HAND_M * ppm * dir_v)
        else:
            # Idle arm: upper arm hangs, forearm folded level (90 deg elbow).
            elbow = (shoulder.x, shoulder.y + UPPER_ARM_M * ppm)
            wrist = (elbow[0] + sign * FOREARM_M * ppm, elbow[1])
            tip = (wrist[0] + sign * HAND_M * ppm, wrist[1])
        points[f"{side}_elbow"] = Keypoint(*elbow)
        points[f"{side}_wrist"] = Keypoint(*wrist)
        points[f"{side}_fingertip"] = Keypoint(*tip)

    if noise_px > 0.0 and rng is not None:
        points = {
            name: Keypoint(kp.x + rng.gauss(0.0, noise_px), kp.y + rng.gauss(0.0, noise_px), kp.confidence)
            for name, kp in points.items()
        }

    return Skeleton(points=points, image_width=cam.image_width, image_height=cam.image_height)
