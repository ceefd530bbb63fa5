"""Scripted leader/follower behaviors: dwell, pause gating, stale pursuit."""

import math
import random

import pytest

from telesim.config import SimConfig, TICK_MS
from telesim.geometry import CameraModel, Pose2D, in_fov
from telesim.kinematics import DriveCommand, RobotState
from telesim.policies import (
    AgentFollower,
    AgentLeader,
    RobotFollower,
    RouteProgress,
    follow_target,
    pilot_command,
)
from telesim.scenario import Board

CFG = SimConfig()


def make_progress(rng_seed=0):
    boards = {
        "b1": Board("b1", Pose2D(2.0, 2.0, 0.0), True),
        "b2": Board("b2", Pose2D(6.0, 6.0, 0.0), True),
    }
    return RouteProgress.create(("b1", "b2"), boards, random.Random(rng_seed))


class TestAgentLeader:
    def test_dwell_at_waypoint_is_stationary(self):
        leader = AgentLeader(CFG, make_progress(), walk_speed=0.8)
        vx, vy, _, done = leader.step((2.0, 2.0), None, TICK_MS)
        assert (vx, vy) == (0.0, 0.0)
        assert not done

    def test_points_at_board_early_in_dwell(self):
        leader = AgentLeader(CFG, make_progress(), walk_speed=0.8)
        _, _, pointing, _ = leader.step((2.0, 2.0), None, TICK_MS)
        assert pointing == "b1"
        # past the pointing window the arm drops
        for _ in range(int(CFG.point_s * 1000 / TICK_MS) + 2):
            _, _, pointing, _ = leader.step((2.0, 2.0), None, TICK_MS)
        assert pointing is None

    def test_advances_after_dwell(self):
        leader = AgentLeader(CFG, make_progress(), walk_speed=0.8)
        for _ in range(int(CFG.dwell_s * 1000 / TICK_MS) + 1):
            leader.step((2.0, 2.0), None, TICK_MS)
        assert leader.progress.index == 1

    def test_pauses_when_partner_lags_with_indicator_data(self):
        leader = AgentLeader(CFG, make_progress(), walk_speed=0.8)
        # traveling (away from the waypoint), partner 3 m behind
        vx, vy, _, _ = leader.step((4.0, 4.0), 3.0, TICK_MS)
        assert (vx, vy) == (0.0, 0.0)

    def test_proceeds_without_indicator_data(self):
        leader = AgentLeader(CFG, make_progress(), walk_speed=0.8)
        vx, vy, _, _ = leader.step((4.0, 4.0), None, TICK_MS)
        assert math.hypot(vx, vy) == pytest.approx(0.8)

    def test_proceeds_when_partner_close(self):
        leader = AgentLeader(CFG, make_progress(), walk_speed=0.8)
        vx, vy, _, _ = leader.step((4.0, 4.0), 1.0, TICK_MS)
        assert math.hypot(vx, vy) == pytest.approx(0.8)

    def test_done_after_route(self):
        leader = AgentLeader(CFG, make_progress(), walk_speed=0.8)
        done = False
        for _ in range(30_000):
            pos = leader.progress.boards[leader.progress.route[min(leader.progress.index, 1)]].pose
            _, _, _, done = leader.step((pos.x, pos.y), None, TICK_MS)
            if done:
                break
        assert done


class TestAgentFollower:
    def test_zero_command_at_target(self):
        follower = AgentFollower(CFG, walk_speed=0.8)
        leader = Pose2D(4.0, 4.0, 0.0)
        target = follow_target(leader, CFG.target_gap_m)
        assert follower.step(target, leader) == (0.0, 0.0)

    def test_speed_proportional_and_capped(self):
        follower = AgentFollower(CFG, walk_speed=0.8)
        leader = Pose2D(4.0, 4.0, 0.0)
        near = follower.step((leader.x - CFG.target_gap_m - 0.4, 4.0), leader)
        far = follower.step((leader.x - CFG.target_gap_m - 9.0, 4.0), leader)
        assert math.hypot(*near) == pytest.approx(0.4, abs=1e-9)
        assert math.hypot(*far) == pytest.approx(0.8)  # capped at walk speed

    def test_target_sits_behind_leader(self):
        leader = Pose2D(4.0, 4.0, math.pi / 2)
        tx, ty = follow_target(leader, 1.2)
        assert (tx, ty) == pytest.approx((4.0, 2.8))


class TestRobotFollower:
    def _robot(self, x=0.0, y=0.0, heading=0.0):
        return RobotState(pose=Pose2D(x, y, heading), cam=CameraModel())

    def test_aware_follower_always_tracks_current_pose(self):
        follower = RobotFollower(CFG, aware=True)
        robot = self._robot()
        behind = Pose2D(0.0, 3.0, 0.0)  # out of the forward FOV
        assert not in_fov(robot.cam, robot.pose, behind.position)
        cmd = follower.step(robot, behind, TICK_MS)
        assert cmd.turn != 0  # it reacts although the camera cannot see the leader

    def test_standard_follower_pursues_stale_point(self):
        follower = RobotFollower(CFG, aware=False)
        robot = self._robot()
        seen = Pose2D(3.0, 0.0, 0.0)
        follower.step(robot, seen, TICK_MS)  # in FOV: becomes last_seen
        assert follower.last_seen == seen
        # leader teleports out of view; the follower keeps chasing the old point
        hidden = Pose2D(-3.0, 0.5, 0.0)
        follower.step(robot, hidden, TICK_MS)
        assert follower.last_seen == seen

    def test_standard_follower_reacquires_on_sight(self):
        follower = RobotFollower(CFG, aware=False)
        robot = self._robot()
        follower.step(robot, Pose2D(3.0, 0.0, 0.0), TICK_MS)
        moved = Pose2D(3.0, 1.0, 0.5)  # still inside the FOV cone
        follower.step(robot, moved, TICK_MS)
        assert follower.last_seen == moved
        assert follower.unseen_ms == 0

    def test_standard_follower_searches_after_losing_the_leader(self):
        follower = RobotFollower(CFG, aware=False)
        # last_seen is right where the robot already is: the stale target is reached
        robot = self._robot(0.0, 0.0)
        follower.last_seen = Pose2D(CFG.target_gap_m, 0.0, 0.0)  # target = robot position
        hidden = Pose2D(-4.0, 0.0, 0.0)
        cmd = DriveCommand(0, 0)
        for _ in range(int(CFG.search_after_s * 1000 / TICK_MS) + 2):
            cmd = follower.step(robot, hidden, TICK_MS)
        assert cmd == DriveCommand(0, 1)  # rotating in place to search

    def test_never_seen_scans(self):
        follower = RobotFollower(CFG, aware=False)
        cmd = follower.step(self._robot(), Pose2D(-5.0, 0.0, 0.0), TICK_MS)
        assert cmd == DriveCommand(0, 1)


class TestPilot:
    def test_stops_inside_radius(self):
        assert pilot_command(Pose2D(0, 0, 0), (0.1, 0.0)) == DriveCommand(0, 0)

    def test_drives_forward_when_aligned(self):
        cmd = pilot_command(Pose2D(0, 0, 0), (3.0, 0.0))
        assert cmd.forward == 1 and cmd.turn == 0

    def test_turns_in_place_when_target_behind(self):
        cmd = pilot_command(Pose2D(0, 0, 0), (-3.0, 0.1))
        assert cmd.forward == 0 and cmd.turn == 1
