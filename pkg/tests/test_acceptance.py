"""Acceptance criteria, one test per criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion; any failure is a red criterion.
"""

import math
import random
import time
from pathlib import Path

import pytest

from telesim import protocol as P
from telesim.awareness import InView, MovementState, compute_indicator
from telesim.config import SimConfig
from telesim.geometry import (
    CameraModel,
    Pose2D,
    in_fov,
    screen_to_azimuth,
    world_to_screen,
    wrap_angle,
)
from telesim.kinematics import DriveCommand, RobotState, TapEvent, apply_tap, step_drive
from telesim.protocol import Envelope, Link, LinkModel, decode, encode
from telesim.runner import read_log, replay, run_experiment
from telesim.scenario import bundled_layout
from telesim.sharedref import detect_pointing
from telesim.synth import synth_skeleton
from telesim.world import World
from tests.test_geometry import oracle_bearing
from tests.test_protocol import fuzz_envelope

CFG = SimConfig()
GOLDEN_DIR = Path(__file__).parent / "golden"


def ok(name: str) -> None:
    print(f"PASS: {name}")


class TestAcceptance:
    def test_geometry_oracle_suite(self):
        """>=10^4 random cases vs brute-force oracle, 1e-9 rad / 0.5 px, < 5 s."""
        start = time.perf_counter()
        rng = random.Random(20240)
        cases = 0
        while cases < 10_000:
            hfov = rng.uniform(math.radians(40), math.radians(170))
            cam = CameraModel(hfov=hfov).with_pan_tilt(rng.uniform(-2.0, 2.0), 0.0)
            obs = Pose2D(rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-7, 7))
            tgt = (obs.x + rng.uniform(-8, 8), obs.y + rng.uniform(-8, 8))
            if math.hypot(tgt[0] - obs.x, tgt[1] - obs.y) < 1e-6:
                continue
            cases += 1

            # bearing against the rotation-matrix oracle
            from telesim.geometry import relative_bearing

            want = oracle_bearing(obs, tgt)
            got = relative_bearing(obs, tgt)
            assert abs(wrap_angle(got - want)) < 1e-9

            # in_fov against the oracle bearing
            beta_oracle = wrap_angle(want - cam.pan)
            if abs(abs(beta_oracle) - cam.half_fov) > 1e-12:  # skip knife-edge cases
                assert in_fov(cam, obs, tgt) == (abs(beta_oracle) <= cam.half_fov)

            # screen round trip: world -> pixel -> azimuth -> pixel
            uv = world_to_screen(cam, obs, tgt)
            if uv is not None:
                azimuth = screen_to_azimuth(cam, obs, uv[0])
                direct = wrap_angle(math.atan2(tgt[1] - obs.y, tgt[0] - obs.x))
                assert abs(wrap_angle(azimuth - direct)) < 1e-9
                back = world_to_screen(
                    cam, obs, (obs.x + math.cos(azimuth), obs.y + math.sin(azimuth))
                )
                assert back is not None
                assert abs(back[0] - uv[0]) < 0.5
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"geometry oracle suite took {elapsed:.1f}s"
        ok(f"geometry oracle suite ({cases} cases, {elapsed:.2f}s)")

    def test_indicator_boundary_flip(self):
        """Sweeping 0 -> 180 deg in 0.01 deg steps flips exactly once at 60.00 +- 0.01."""
        cam = CameraModel(hfov=2.0 * math.pi / 3.0)
        robot = RobotState(pose=Pose2D(0.0, 0.0, 0.0), cam=cam)
        flips = []
        prev_in = None
        for k in range(18001):
            bearing = math.radians(k * 0.01)
            partner = (3.0 * math.cos(bearing), 3.0 * math.sin(bearing))
            ind = compute_indicator(robot, partner, MovementState.STATIONARY)
            now_in = isinstance(ind.mode, InView)
            if prev_in is not None and now_in != prev_in:
                flips.append(k * 0.01)
            prev_in = now_in
        assert len(flips) == 1, f"expected exactly one mode flip, got {flips}"
        assert abs(flips[0] - 60.0) <= 0.01 + 1e-9, f"flip at {flips[0]} deg"
        ok(f"indicator boundary flip at {flips[0]:.2f} deg")

    def test_protocol_conformance(self):
        """Golden files byte-identical; 10^4 fuzz round trips; seeded link reproducible."""
        golden = sorted(GOLDEN_DIR.glob("*.ndjson"))
        assert golden, "no golden files committed"
        lines = 0
        for path in golden:
            if path.name == "golden_run.ndjson":
                continue  # the run log is covered by the replay criterion
            for line in path.read_bytes().splitlines(keepends=True):
                assert encode(decode(line)) == line, f"{path.name}: round trip not byte-identical"
                lines += 1
        assert lines > 0

        rng = random.Random(777)
        for _ in range(10_000):
            env = fuzz_envelope(rng)
            assert decode(encode(env)) == env

        model = LinkModel(one_way_delay_ms=50.0, jitter_ms=20.0, drop_prob=0.1, seed=99)
        env = Envelope("ctrl", 1, 0, P.drive_keys(w=True))
        link_a, link_b = Link(model), Link(model)
        sched1 = [link_a.transmit(env, float(t * 10)) for t in range(1000)]
        sched2 = [link_b.transmit(env, float(t * 10)) for t in range(1000)]
        assert sched1 == sched2
        drops = sum(1 for d in sched1 if d is None)
        assert 0 < drops < 1000
        ok(f"protocol conformance ({lines} golden lines, 10k fuzz, {drops} seeded drops)")

    def test_determinism_replay(self, tmp_path):
        """4 layouts x 3 seeds: run -> log -> replay reproduces the hash; < 60 s total."""
        start = time.perf_counter()
        for layout in (1, 2, 3, 4):
            for seed in (0, 1, 2):
                log = tmp_path / f"run_{layout}_{seed}.ndjson"
                res = run_experiment(bundled_layout(layout, seed=seed), CFG, log_path=log)
                assert replay(log) == res.final_hash, f"layout {layout} seed {seed} diverged"
        golden_log = GOLDEN_DIR / "golden_run.ndjson"
        header, _ = read_log(golden_log)
        assert replay(golden_log) == header["final_hash"], "committed golden log diverged"
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0, f"determinism suite took {elapsed:.1f}s"
        ok(f"determinism/replay (12 runs + golden log, {elapsed:.1f}s)")

    def test_directional_proximity_effect(self):
        """20 seeds x 4 layouts, robot as follower: teleaware mean <= 0.9 x standard."""
        start = time.perf_counter()
        means = {}
        for condition in ("teleaware", "standard"):
            distances = []
            for layout in (1, 2, 3, 4):
                for seed in range(20):
                    scenario = bundled_layout(layout, condition=condition, seed=seed, leader="local")
                    report = run_experiment(scenario, CFG).report
                    assert report.completed, f"{condition} layout {layout} seed {seed} timed out"
                    distances.append(report.mean_distance_m)
            means[condition] = sum(distances) / len(distances)
        elapsed = time.perf_counter() - start
        ratio = means["teleaware"] / means["standard"]
        assert ratio <= 0.9, (
            f"teleaware {means['teleaware']:.3f} m vs standard {means['standard']:.3f} m, ratio {ratio:.3f}"
        )
        assert elapsed < 120.0, f"sweep took {elapsed:.1f}s"
        ok(
            "directional proximity effect "
            f"(teleaware {means['teleaware']:.2f} m vs standard {means['standard']:.2f} m, "
            f"ratio {ratio:.2f}, {elapsed:.0f}s)"
        )

    def test_shoulder_tap_exact_rotation(self):
        """From any heading a tap turns exactly tap_angle within 1 deg and clears."""
        rng = random.Random(5)
        checked = 0
        for _ in range(200):
            start_heading = rng.uniform(-math.pi, math.pi)
            side = rng.choice(["left", "right"])
            robot = RobotState(pose=Pose2D(0.0, 0.0, start_heading), cam=CameraModel())
            robot = apply_tap(robot, TapEvent(side), CFG)
            assert robot.rotation_goal is not None
            # tap while rotating is a no-op
            again = apply_tap(robot, TapEvent("left" if side == "right" else "right"), CFG)
            assert again == robot
            steps = 0
            while robot.rotation_goal is not None:
                robot = step_drive(robot, DriveCommand(1, 1), 0.02, CFG)  # input suppressed
                steps += 1
                assert steps < 500, "rotation never converged"
            expected = math.radians(CFG.tap_angle_deg) * (1.0 if side == "left" else -1.0)
            achieved = wrap_angle(robot.pose.heading - start_heading)
            assert abs(wrap_angle(achieved - expected)) < math.radians(1.0)
            checked += 1
        ok(f"shoulder tap exact rotation ({checked} headings)")

    def test_pointing_detection_precision_recall(self):
        """500 pointing + 500 idle skeletons: 1.0/1.0 clean, >= 0.95 at 2 px noise."""
        cam = CameraModel()
        robot = Pose2D(0.0, 0.0, 0.0)
        rng = random.Random(31337)

        def sample_case(pointing: bool, noise: float, noise_rng):
            # figure in front of the camera at conversational range (the
            # task's typical partner separation is 1.2-1.5 m)
            bearing = rng.uniform(-0.6, 0.6)
            dist = rng.uniform(1.0, 2.5)
            agent = (dist * math.cos(bearing), dist * math.sin(bearing))
            target = None
            if pointing:
                ang = rng.uniform(-math.pi, math.pi)
                reach = rng.uniform(1.0, 4.0)
                target = (agent[0] + reach * math.cos(ang), agent[1] + reach * math.sin(ang))
            skel = synth_skeleton(agent, target, cam, robot, rng=noise_rng, noise_px=noise)
            assert skel is not None
            detected = (
                detect_pointing(skel, "right", CFG.elbow_min_deg) is not None
                or detect_pointing(skel, "left", CFG.elbow_min_deg) is not None
            )
            return skel, detected

        # noise-free: perfect separation
        clean: list[tuple] = []
        for i in range(1000):
            pointing = i < 500
            skel, detected = sample_case(pointing, 0.0, None)
            assert detected == pointing, f"clean case {i}: pointing={pointing} detected={detected}"
            clean.append((skel, pointing))
        ok("pointing detection clean precision=recall=1.0 (1000 skeletons)")

        # 2 px gaussian keypoint noise
        noise_rng = random.Random(4242)
        tp = fp = fn = tn = 0
        for i in range(1000):
            pointing = i < 500
            _, detected = sample_case(pointing, 2.0, noise_rng)
            if pointing and detected:
                tp += 1
            elif pointing:
                fn += 1
            elif detected:
                fp += 1
            else:
                tn += 1
        precision = tp / (tp + fp) if tp + fp else 1.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        assert precision >= 0.95, f"precision {precision:.3f}"
        assert recall >= 0.95, f"recall {recall:.3f}"
        ok(f"pointing detection noisy precision={precision:.3f} recall={recall:.3f}")

        # exact scale/translation invariance of the decision
        from telesim.sharedref import Keypoint, Skeleton

        mismatches = 0
        for skel, pointing in clean[:200] + clean[500:700]:
            scale = rng.uniform(0.5, 1.4)
            dx, dy = rng.uniform(-30, 30), rng.uniform(-30, 30)
            moved = Skeleton(
                points={
                    name: Keypoint(kp.x * scale + dx, kp.y * scale + dy, kp.confidence)
                    for name, kp in skel.points.items()
                },
                image_width=skel.image_width * scale + dx + 1000,  # keep points in bounds
                image_height=skel.image_height * scale + dy + 1000,
            )
            base = (
                detect_pointing(skel, "right", CFG.elbow_min_deg) is not None
                or detect_pointing(skel, "left", CFG.elbow_min_deg) is not None
            )
            trans = (
                detect_pointing(moved, "right", CFG.elbow_min_deg) is not None
                or detect_pointing(moved, "left", CFG.elbow_min_deg) is not None
            )
            if base != trans:
                mismatches += 1
        assert mismatches == 0, f"{mismatches} invariance mismatches"
        ok("pointing detection scale/translation invariance exact (400 transforms)")

    def test_feature_flag_purity(self):
        """Standard-condition runs emit zero indicator/reference/tap messages."""
        for leader in ("local", "remote"):
            kinds: dict[str, set[str]] = {}
            for condition in ("teleaware", "standard"):
                world = World(bundled_layout(1, seed=0, condition=condition, leader=leader), CFG)
                seen: set[str] = set()
                while not world.done and world.tick_count < 30_000:
                    for env in world.tick():
                        seen.add(env.kind)
                kinds[condition] = seen
            awareness_kinds = {"indicator", "gesture_ref", "tap"}
            assert kinds["standard"] & awareness_kinds == set(), (
                f"standard run ({leader} leader) leaked {kinds['standard'] & awareness_kinds}"
            )
            diff = kinds["teleaware"] - kinds["standard"]
            assert diff <= awareness_kinds
            assert "indicator" in diff
        ok("feature-flag purity (standard strips indicator/reference/tap)")
