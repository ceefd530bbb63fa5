"""Experiment scenarios: the 8x8 m arena, display boards, routes and roles.

Scenario files are TOML with [arena], [[board]], [route], [roles],
[condition] and a top-level seed; four layouts ship with the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import ScenarioError
from .geometry import Pose2D

TELEAWARE = "teleaware"
STANDARD = "standard"
CONDITIONS = (TELEAWARE, STANDARD)

LOCAL = "local"
REMOTE = "remote"

# Experiment arenas hold six boards: four with content plus two blanks.
EXPERIMENT_BOARD_COUNT = 6
EXPERIMENT_CONTENT_COUNT = 4


@dataclass(frozen=True)
class Board:
    id: str
    pose: Pose2D  # position plus the direction the board faces
    has_content: bool
    visit_radius: float = 1.0

    def __post_init__(self):
        if self.visit_radius <= 0.0:
            raise ValueError("visit_radius must be positive")


@dataclass(frozen=True)
class Arena:
    """Axis-aligned walkable rectangle, 8 x 8 m in the exhibition task."""

    width: float = 8.0
    height: float = 8.0

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height

    def clamp(self, x: float, y: float) -> tuple[float, float]:
        return (
            min(max(x, 0.0), self.width),
            min(max(y, 0.0), self.height),
        )


@dataclass(frozen=True)
class Scenario:
    layout_id: int
    arena: Arena
    boards: tuple[Board, ...]
    route: tuple[str, ...]  # content board ids in visiting order
    leader: str  # "local" (user leads) or "remote" (robot leads)
    condition: str
    seed: int
    robot_start: Pose2D = field(default_factory=lambda: Pose2D(4.0, 1.0, math.pi / 2.0))
    local_start: Pose2D = field(default_factory=lambda: Pose2D(3.0, 1.0, math.pi / 2.0))

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ScenarioError(f"condition must be one of {CONDITIONS}, got {self.condition!r}")
        if self.leader not in (LOCAL, REMOTE):
            raise ScenarioError(f"leader must be 'local' or 'remote', got {self.leader!r}")
        by_id = {b.id: b for b in self.boards}
        if len(by_id) != len(self.boards):
            raise ScenarioError("duplicate board ids")
        content_ids = {b.id for b in self.boards if b.has_content}
        if set(self.route) != content_ids or len(self.route) != len(content_ids):
            raise ScenarioError(
                f"route must visit each content board exactly once: route={self.route}, content={sorted(content_ids)}"
            )
        for b in self.boards:
            if not self.arena.contains(b.pose.x, b.pose.y):
                raise ScenarioError(f"board {b.id} at ({b.pose.x}, {b.pose.y}) outside arena")
        for name, pose in (("robot_start", self.robot_start), ("local_start", self.local_start)):
            if not self.arena.contains(pose.x, pose.y):
                raise ScenarioError(f"{name} outside arena")

    def board(self, board_id: str) -> Board:
        for b in self.boards:
            if b.id == board_id:
                return b
        raise KeyError(board_id)

    @property
    def teleaware(self) -> bool:
        return self.condition == TELEAWARE

    def with_overrides(self, condition: str | None = None, seed: int | None = None,
                       leader: str | None = None) -> "Scenario":
        sc = self
        if condition is not None:
            sc = replace(sc, condition=condition)
        if seed is not None:
            sc = replace(sc, seed=seed)
        if leader is not None:
            sc = replace(sc, leader=leader)
        return sc

    def to_dict(self) -> dict[str, Any]:
        return {
            "layout_id": self.layout_id,
            "arena": {"width": self.arena.width, "height": self.arena.height},
            "boards": [
                {
                    "id": b.id,
                    "x": b.pose.x,
                    "y": b.pose.y,
                    "facing_rad": b.pose.heading,
                    "content": b.has_content,
                    "visit_radius": b.visit_radius,
                }
                for b in self.boards
            ],
            "route": list(self.route),
            "leader": self.leader,
            "condition": self.condition,
            "seed": self.seed,
            "robot_start": [self.robot_start.x, self.robot_start.y, self.robot_start.heading],
            "local_start": [self.local_start.x, self.local_start.y, self.local_start.heading],
        }

    @staticmethod
    def from_dict(data: dict[str, Any]) -> "Scenario":
        boards = tuple(
            Board(
                id=b["id"],
                pose=Pose2D(b["x"], b["y"], b["facing_rad"]),
                has_content=b["content"],
                visit_radius=b.get("visit_radius", 1.0),
            )
            for b in data["boards"]
        )
        return Scenario(
            layout_id=data["layout_id"],
            arena=Arena(data["arena"]["width"], data["arena"]["height"]),
            boards=boards,
            route=tuple(data["route"]),
            leader=data["leader"],
            condition=data["condition"],
            seed=data["seed"],
            robot_start=Pose2D(*data["robot_start"]),
            local_start=Pose2D(*data["local_start"]),
        )


def _scenario_from_toml(data: dict[str, Any], source: str) -> Scenario:
    try:
        arena_tbl = data.get("arena", {})
        arena = Arena(float(arena_tbl.get("width", 8.0)), float(arena_tbl.get("height", 8.0)))
        boards = tuple(
            Board(
                id=str(b["id"]),
                pose=Pose2D(float(b["x"]), float(b["y"]), math.radians(float(b.get("facing_deg", 0.0)))),
                has_content=bool(b.get("content", False)),
                visit_radius=float(b.get("visit_radius", 1.0)),
            )
            for b in data.get("board", [])
        )
        start = data.get("start", {})

        def start_pose(key: str, default: Pose2D) -> Pose2D:
            raw = start.get(key)
            if raw is None:
                return default
            x, y, heading_deg = raw
            return Pose2D(float(x), float(y), math.radians(float(heading_deg)))

        return Scenario(
            layout_id=int(data.get("layout", 0)),
            arena=arena,
            boards=boards,
            route=tuple(str(i) for i in data["route"]["order"]),
            leader=str(data.get("roles", {}).get("leader", LOCAL)),
            condition=str(data.get("condition", {}).get("name", TELEAWARE)),
            seed=int(data.get("seed", 0)),
            robot_start=start_pose("robot", Pose2D(4.0, 1.0, math.pi / 2.0)),
            local_start=start_pose("local", Pose2D(3.0, 1.0, math.pi / 2.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid scenario {source}: {exc}") from exc


def load_scenario(
    path: str | Path,
    condition: str | None = None,
    seed: int | None = None,
    leader: str | None = None,
) -> Scenario:
    """Load a scenario TOML file, optionally overriding condition/seed/leader."""
    path = Path(path)
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return _scenario_from_toml(data, str(path)).with_overrides(condition, seed, leader)


def bundled_layout(
    layout_id: int,
    condition: str = TELEAWARE,
    seed: int = 0,
    leader: str = LOCAL,
) -> Scenario:
    """Load one of the four layouts shipped with the package (1..4)."""
    if layout_id not in (1, 2, 3, 4):
        raise ScenarioError(f"layout_id must be 1..4, got {layout_id}")
    ref = resources.files("telesim").joinpath(f"scenarios/layout{layout_id}.toml")
    data = tomllib.loads(ref.read_text(encoding="utf-8"))
    return _scenario_from_toml(data, f"layout{layout_id}").with_overrides(condition, seed, leader)


def validate_experiment(scenario: Scenario) -> None:
    """Check the board census the exhibition task prescribes (6 boards: 4 + 2 blank)."""
    content = sum(1 for b in scenario.boards if b.has_content)
    if len(scenario.boards) != EXPERIMENT_BOARD_COUNT or content != EXPERIMENT_CONTENT_COUNT:
        raise ScenarioError(
            f"experiment layouts need {EXPERIMENT_BOARD_COUNT} boards "
            f"({EXPERIMENT_CONTENT_COUNT} content), got {len(scenario.boards)} ({content} content)"
        )
