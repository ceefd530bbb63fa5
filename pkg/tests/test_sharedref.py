"""Pointing detection, gesture debouncing, and click-to-floor-ray behavior."""

import itertools
import math
import random

import pytest

from telesim.config import SimConfig
from telesim.errors import ScreenRangeError
from telesim.geometry import CameraModel, Pose2D, world_to_screen
from telesim.kinematics import RobotState
from telesim.sharedref import (
    GestureDebouncer,
    Keypoint,
    PointingReference,
    RefSource,
    ReferenceRegistry,
    Skeleton,
    click_to_floor_ray,
    debounce_gesture,
    detect_pointing,
)

CFG = SimConfig()
W, H = 960.0, 540.0


def make_skeleton(points: dict[str, tuple[float, float]], conf: float = 1.0) -> Skeleton:
    return Skeleton(
        points={name: Keypoint(x, y, conf) for name, (x, y) in points.items()},
        image_width=W,
        image_height=H,
    )


def pointing_skeleton(scale: float = 1.0, dx: float = 0.0, dy: float = 0.0, elbow_bend_deg: float = 0.0) -> Skeleton:
    """Right arm extended horizontally; elbow_bend_deg > 0 folds the forearm down."""
    shoulder = (480.0, 200.0)
    upper = 40.0
    fore = 40.0
    elbow = (shoulder[0] + upper, shoulder[1])
    bend = math.radians(elbow_bend_deg)
    wrist = (elbow[0] + fore * math.cos(bend), elbow[1] + fore * math.sin(bend))
    tip = (wrist[0] + 10.0 * math.cos(bend), wrist[1] + 10.0 * math.sin(bend))
    pts = {
        "head": (480.0, 160.0),
        "left_shoulder": (460.0, 200.0),
        "right_shoulder": shoulder,
        "right_elbow": elbow,
        "right_wrist": wrist,
        "right_fingertip": tip,
        "left_hip": (465.0, 280.0),
        "right_hip": (495.0, 280.0),
    }
    return make_skeleton({k: (x * scale + dx, y * scale + dy) for k, (x, y) in pts.items()})


class TestDetectPointing:
    def test_straight_arm_detected_with_180(self):
        g = detect_pointing(pointing_skeleton(), "right")
        assert g is not None
        assert g.elbow_angle_deg == pytest.approx(180.0)

    def test_bent_elbow_rejected(self):
        g = detect_pointing(pointing_skeleton(elbow_bend_deg=90.0), "right")
        assert g is None

    def test_boundary_160_inclusive(self):
        # bend of 20 deg leaves exactly 160 deg at the elbow
        g = detect_pointing(pointing_skeleton(elbow_bend_deg=20.0), "right")
        assert g is not None
        assert g.elbow_angle_deg == pytest.approx(160.0, abs=1e-9)
        assert detect_pointing(pointing_skeleton(elbow_bend_deg=20.1), "right") is None

    def test_low_confidence_keypoints_yield_none(self):
        skel = pointing_skeleton()
        downgraded = Skeleton(
            points={
                name: Keypoint(kp.x, kp.y, 0.3 if name == "right_wrist" else kp.confidence)
                for name, kp in skel.points.items()
            },
            image_width=W,
            image_height=H,
        )
        assert detect_pointing(downgraded, "right") is None

    def test_missing_keypoints_yield_none(self):
        skel = make_skeleton({"head": (480, 160), "right_shoulder": (480, 200)})
        assert detect_pointing(skel, "right") is None

    def test_arm_hanging_below_hips_rejected(self):
        # collinear arm pointing straight down: angle passes, hip rule rejects
        pts = {
            "head": (480.0, 160.0),
            "left_shoulder": (460.0, 200.0),
            "right_shoulder": (480.0, 200.0),
            "right_elbow": (480.0, 240.0),
            "right_wrist": (480.0, 285.0),
            "left_hip": (465.0, 280.0),
            "right_hip": (495.0, 280.0),
        }
        assert detect_pointing(make_skeleton(pts), "right") is None

    def test_touch_line_starts_at_head_and_ends_on_border(self):
        g = detect_pointing(pointing_skeleton(), "right")
        assert g is not None
        (x0, y0), (x1, y1) = g.touch_line
        assert (x0, y0) == (480.0, 160.0)
        on_border = math.isclose(x1, 0.0) or math.isclose(x1, W) or math.isclose(y1, 0.0) or math.isclose(y1, H)
        assert on_border

    def test_scale_translation_invariance(self):
        # Transforms keep every keypoint inside the image (the valid domain
        # for image-plane detections); the decision must not change.
        rng = random.Random(31)
        for _ in range(300):
            scale = rng.uniform(0.3, 1.5)
            # base skeleton bounding box: x in [460, 570], y in [160, 280]
            dx = rng.uniform(-460.0 * scale, W - 580.0 * scale)
            dy = rng.uniform(-160.0 * scale, H - 280.0 * scale)
            for bend, expect in ((0.0, True), (90.0, False), (30.0, False)):
                base = detect_pointing(pointing_skeleton(elbow_bend_deg=bend), "right")
                moved = detect_pointing(pointing_skeleton(scale, dx, dy, elbow_bend_deg=bend), "right")
                assert (base is not None) == expect
                assert (moved is not None) == (base is not None)
                if base is not None and moved is not None:
                    assert moved.elbow_angle_deg == pytest.approx(base.elbow_angle_deg, abs=1e-6)

    def test_hip_fallback_without_hip_keypoints(self):
        skel = pointing_skeleton()
        no_hips = Skeleton(
            points={k: v for k, v in skel.points.items() if not k.endswith("_hip")},
            image_width=W,
            image_height=H,
        )
        assert detect_pointing(no_hips, "right") is not None

    def test_invalid_side_raises(self):
        with pytest.raises(ValueError):
            detect_pointing(pointing_skeleton(), "up")


class TestDebounce:
    GESTURE = None  # filled in setup

    def setup_method(self):
        self.gesture = detect_pointing(pointing_skeleton(), "right")
        assert self.gesture is not None

    def test_four_frames_then_gap_never_emits(self):
        frames = [self.gesture] * 4 + [None] * 10
        outputs = list(debounce_gesture(frames, fps=50.0))
        assert all(o is None for o in outputs)

    def test_five_consecutive_frames_emit(self):
        frames = [self.gesture] * 5
        outputs = list(debounce_gesture(frames, fps=50.0))
        assert outputs[-1] is not None
        assert all(o is None for o in outputs[:4])

    def test_ttl_keeps_line_alive_then_drops_it(self):
        deb = GestureDebouncer(fps=50.0, n_consecutive=5, ttl_s=3.0)
        t = 0.0
        for _ in range(5):
            t += 0.02
            deb.update(self.gesture, t)
        last_detection = t
        assert deb.update(None, last_detection + 2.9) is not None
        deb2 = GestureDebouncer(fps=50.0, n_consecutive=5, ttl_s=3.0)
        t = 0.0
        for _ in range(5):
            t += 0.02
            deb2.update(self.gesture, t)
        assert deb2.update(None, t + 3.1) is None

    def test_exhaustive_no_early_emission(self):
        # For every binary detection string up to length 10, the first
        # emission can only happen at or after the 5th consecutive detection.
        for n in range(1, 11):
            for bits in itertools.product([0, 1], repeat=n):
                frames = [self.gesture if b else None for b in bits]
                outputs = list(debounce_gesture(frames, fps=50.0, ttl_s=0.01))
                streak = 0
                for i, (b, out) in enumerate(zip(bits, outputs)):
                    streak = streak + 1 if b else 0
                    if out is not None and streak < 5:
                        # active only while the ttl window of a prior valid emission lasts
                        pytest.fail(f"emitted with streak {streak} at frame {i} for {bits}")

    def test_reemission_requires_fresh_streak(self):
        deb = GestureDebouncer(fps=50.0, n_consecutive=5, ttl_s=0.1)
        t = 0.0
        for _ in range(5):
            t += 0.02
            deb.update(self.gesture, t)
        # long silence lets the ttl lapse
        t += 1.0
        assert deb.update(None, t) is None
        for k in range(4):
            t += 0.02
            assert deb.update(self.gesture, t) is None  # 4 frames: not yet
        t += 0.02
        assert deb.update(self.gesture, t) is not None


def robot_at(x=0.0, y=0.0, heading=0.0, pan=0.0) -> RobotState:
    cam = CameraModel().with_pan_tilt(pan, 0.0)
    return RobotState(pose=Pose2D(x, y, heading), cam=cam)


class TestClickToFloorRay:
    def test_center_click_points_along_heading(self):
        robot = robot_at(heading=0.7)
        ref = click_to_floor_ray(robot, W / 2.0, now_s=1.0, cfg=CFG)
        assert ref.ray.azimuth == pytest.approx(0.7)
        assert ref.ray.extent == CFG.ray_extent_m
        assert ref.display_ttl == CFG.click_ttl_s
        assert ref.source is RefSource.REMOTE_CLICK

    def test_left_edge_click(self):
        robot = robot_at(heading=0.0)
        ref = click_to_floor_ray(robot, 0.0, now_s=0.0, cfg=CFG)
        assert ref.ray.azimuth == pytest.approx(math.radians(60.0), abs=1e-9)

    def test_out_of_range_click_errors(self):
        with pytest.raises(ScreenRangeError):
            click_to_floor_ray(robot_at(), -5.0, now_s=0.0, cfg=CFG)

    def test_ray_renders_back_to_same_pixel(self):
        # click -> azimuth -> a point along the ray -> world_to_screen: same u
        rng = random.Random(77)
        for _ in range(500):
            robot = robot_at(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), pan=rng.uniform(-0.8, 0.8))
            u = rng.uniform(0.0, W)
            ref = click_to_floor_ray(robot, u, now_s=0.0, cfg=CFG)
            px = robot.pose.x + 2.0 * math.cos(ref.ray.azimuth)
            py = robot.pose.y + 2.0 * math.sin(ref.ray.azimuth)
            uv = world_to_screen(robot.cam, robot.pose, (px, py))
            assert uv is not None
            assert abs(uv[0] - u) < 0.5

    def test_replacement_rule(self):
        reg = ReferenceRegistry()
        robot = robot_at()
        first = click_to_floor_ray(robot, 100.0, now_s=0.0, cfg=CFG)
        second = click_to_floor_ray(robot, 500.0, now_s=1.0, cfg=CFG)
        reg.set(first)
        reg.set(second)
        active = reg.active()
        assert len(active) == 1
        assert active[0] is second


class TestReferenceRegistry:
    def test_one_per_source(self):
        reg = ReferenceRegistry()
        robot = robot_at()
        click = click_to_floor_ray(robot, 10.0, now_s=0.0, cfg=CFG)
        gesture = PointingReference(
            source=RefSource.LOCAL_GESTURE,
            ray=click.ray,
            created_at=0.0,
            display_ttl=3.0,
        )
        reg.set(click)
        reg.set(gesture)
        assert len(reg.active()) == 2
        reg.set(click_to_floor_ray(robot, 20.0, now_s=0.5, cfg=CFG))
        assert len(reg.active()) == 2  # replaced, not added

    def test_expiry(self):
        reg = ReferenceRegistry()
        reg.set(click_to_floor_ray(robot_at(), 10.0, now_s=0.0, cfg=CFG))
        reg.expire(CFG.click_ttl_s - 0.1)
        assert len(reg.active()) == 1
        reg.expire(CFG.click_ttl_s + 0.1)
        assert reg.active() == []

    def test_ttl_must_be_positive(self):
        robot = robot_at()
        ray = click_to_floor_ray(robot, 10.0, now_s=0.0, cfg=CFG).ray
        with pytest.raises(ValueError):
            PointingReference(source=RefSource.REMOTE_CLICK, ray=ray, created_at=0.0, display_ttl=0.0)
