"""Objective task measures: time, mean separation, trajectory overlap.

Trajectory overlap is the intersection-over-union of the occupancy-grid
cell sets the two parties visited (0.25 m cells by default); it is
symmetric and equals 1.0 exactly when the cell sets are identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

PoseRecord = tuple[int, float, float, float, float, float, float]  # tick, robot xyh, local xyh


def occupancy_cells(points: Iterable[tuple[float, float]], cell_m: float = 0.25) -> set[tuple[int, int]]:
    """Grid cells touched by a sequence of positions."""
    return {(math.floor(x / cell_m), math.floor(y / cell_m)) for x, y in points}


def trajectory_overlap(
    a: Iterable[tuple[float, float]],
    b: Iterable[tuple[float, float]],
    cell_m: float = 0.25,
) -> float:
    """Occupancy-grid IoU of two trajectories, in [0, 1]."""
    cells_a = occupancy_cells(a, cell_m)
    cells_b = occupancy_cells(b, cell_m)
    union = cells_a | cells_b
    if not union:
        return 1.0  # two empty trajectories occupy identical (empty) cell sets
    return len(cells_a & cells_b) / len(union)


def mean_distance(records: Sequence[PoseRecord]) -> float:
    """Mean per-tick separation between robot and local user."""
    if not records:
        return 0.0
    total = 0.0
    for _, rx, ry, _, ax, ay, _ in records:
        total += math.hypot(rx - ax, ry - ay)
    return total / len(records)


def distance_series(records: Sequence[PoseRecord]) -> list[float]:
    return [math.hypot(rx - ax, ry - ay) for _, rx, ry, _, ax, ay, _ in records]


@dataclass(frozen=True)
class MetricsReport:
    task_time_s: float
    mean_distance_m: float
    trajectory_overlap: float
    condition: str
    layout_id: int
    seed: int
    leader: str
    completed: bool
    distances: tuple[float, ...] = field(repr=False, default=())

    def __post_init__(self):
        if self.task_time_s <= 0.0:
            raise ValueError("task_time_s must be positive")
        if not 0.0 <= self.trajectory_overlap <= 1.0:
            raise ValueError("trajectory_overlap must be in [0, 1]")
        if self.mean_distance_m < 0.0:
            raise ValueError("mean_distance_m must be non-negative")

    def to_dict(self, include_series: bool = False) -> dict[str, Any]:
        data: dict[str, Any] = {
            "task_time_s": self.task_time_s,
            "mean_distance_m": self.mean_distance_m,
            "trajectory_overlap": self.trajectory_overlap,
            "condition": self.condition,
            "layout_id": self.layout_id,
            "seed": self.seed,
            "leader": self.leader,
            "completed": self.completed,
        }
        if include_series:
            data["distances"] = list(self.distances)
        return data


def report_from_records(
    records: Sequence[PoseRecord],
    task_time_s: float,
    condition: str,
    layout_id: int,
    seed: int,
    leader: str,
    completed: bool,
    cell_m: float = 0.25,
) -> MetricsReport:
    """Compute every metric from the per-tick pose records alone."""
    robot_pts = [(rx, ry) for _, rx, ry, _, _, _, _ in records]
    local_pts = [(ax, ay) for _, _, _, _, ax, ay, _ in records]
    return MetricsReport(
        task_time_s=task_time_s,
        mean_distance_m=mean_distance(records),
        trajectory_overlap=trajectory_overlap(local_pts, robot_pts, cell_m),
        condition=condition,
        layout_id=layout_id,
        seed=seed,
        leader=leader,
        completed=completed,
        distances=tuple(distance_series(records)),
    )
