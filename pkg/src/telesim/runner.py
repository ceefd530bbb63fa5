"""Experiment runner: headless runs, NDJSON event logs, replay, condition sweeps.

Log layout (one canonical JSON object per line):
  line 1   header with scenario, config, tick count, final world-state hash
  then     {"kind":"env","dir":"in"|"out","tick":k,"env":{...}} for every envelope
           {"kind":"pose","tick":k,"robot":[x,y,h],"local":[x,y,h]} per tick

Replay re-runs the simulation from the header's scenario and the logged
inbound envelopes and must reproduce every pose record and the final hash.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from .config import SimConfig, TICK_DT_S
from .errors import ParseError, ReplayDivergenceError
from .metrics import MetricsReport, PoseRecord, report_from_records
from .protocol import Envelope, decode
from .scenario import CONDITIONS, LOCAL, REMOTE, Scenario, bundled_layout
from .world import World

LOG_VERSION = 1


@dataclass
class RunResult:
    report: MetricsReport
    final_hash: str
    ticks: int
    world: World


def run_experiment(
    scenario: Scenario,
    cfg: SimConfig | None = None,
    log_path: str | Path | None = None,
    inbound_schedule: Sequence[tuple[int, Envelope]] = (),
    collect_outbound: bool = False,
) -> RunResult:
    """Run the scripted task until the route completes or the time cap hits.

    inbound_schedule lists (tick, envelope) pairs to deliver, e.g. a replayed
    operator session. When log_path is given the full event log is written.
    """
    cfg = cfg or SimConfig()
    world = World(scenario, cfg)
    max_ticks = int(round(cfg.timeout_s / TICK_DT_S))
    logging = log_path is not None or collect_outbound

    pending = sorted(inbound_schedule, key=lambda item: item[0])
    next_in = 0
    env_lines: list[dict[str, Any]] = []

    while not world.done and world.tick_count < max_ticks:
        tick = world.tick_count
        inbound: list[Envelope] = []
        while next_in < len(pending) and pending[next_in][0] <= tick:
            inbound.append(pending[next_in][1])
            next_in += 1
        out = world.tick(inbound)
        if logging:
            for env in inbound:
                env_lines.append({"kind": "env", "dir": "in", "tick": tick, "env": envelope_dict(env)})
            for env in out:
                env_lines.append({"kind": "env", "dir": "out", "tick": tick, "env": envelope_dict(env)})

    completed = world.done
    task_time = world.task_time_s if completed else world.tick_count * TICK_DT_S
    report = report_from_records(
        world.pose_records,
        task_time_s=task_time,
        condition=scenario.condition,
        layout_id=scenario.layout_id,
        seed=scenario.seed,
        leader=scenario.leader,
        completed=completed,
        cell_m=cfg.grid_cell_m,
    )
    final_hash = world.state_hash()

    if log_path is not None:
        write_log(Path(log_path), scenario, cfg, world, env_lines, final_hash, completed)
    return RunResult(report=report, final_hash=final_hash, ticks=world.tick_count, world=world)


def envelope_dict(env: Envelope) -> dict[str, Any]:
    return {"channel": env.channel, "payload": env.payload, "seq": env.seq, "t_ms": env.t_ms}


def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def write_log(
    path: Path,
    scenario: Scenario,
    cfg: SimConfig,
    world: World,
    env_lines: list[dict[str, Any]],
    final_hash: str,
    completed: bool,
) -> None:
    header = {
        "kind": "header",
        "version": LOG_VERSION,
        "scenario": scenario.to_dict(),
        "config": cfg.to_dict(),
        "live_operator": world.live_operator,
        "ticks": world.tick_count,
        "completed": completed,
        "final_hash": final_hash,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_canonical(header) + "\n")
        records = iter(world.pose_records)
        pending = sorted(env_lines, key=lambda line: line["tick"])
        i = 0
        for rec in records:
            tick = rec[0]
            while i < len(pending) and pending[i]["tick"] < tick:
                fh.write(_canonical(pending[i]) + "\n")
                i += 1
            fh.write(_canonical(_pose_line(rec)) + "\n")
        while i < len(pending):
            fh.write(_canonical(pending[i]) + "\n")
            i += 1


def _pose_line(rec: PoseRecord) -> dict[str, Any]:
    tick, rx, ry, rh, ax, ay, ah = rec
    return {"kind": "pose", "tick": tick, "robot": [rx, ry, rh], "local": [ax, ay, ah]}


def read_log(path: str | Path) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    """Parse a log into (header, body lines); raises ParseError on bad lines."""
    header: dict[str, Any] | None = None
    body: list[dict[str, Any]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: malformed log line: {exc}") from exc
            if lineno == 1:
                if not isinstance(obj, dict) or obj.get("kind") != "header":
                    raise ParseError(f"{path}: first line must be the log header")
                header = obj
            else:
                body.append(obj)
    if header is None:
        raise ParseError(f"{path}: empty log")
    return header, body


def replay(log_path: str | Path) -> str:
    """Re-run a logged session and verify it reproduces the recorded state.

    Returns the final world-state hash; raises ReplayDivergenceError with
    the first divergent tick on mismatch.
    """
    header, body = read_log(log_path)
    scenario = Scenario.from_dict(header["scenario"])
    cfg = SimConfig().merged(header["config"])
    world = World(scenario, cfg, live_operator=bool(header.get("live_operator", False)))

    inbound_by_tick: dict[int, list[Envelope]] = {}
    pose_lines: list[dict[str, Any]] = []
    for line in body:
        kind = line.get("kind")
        if kind == "env" and line.get("dir") == "in":
            env_obj = line["env"]
            env = decode(_canonical(env_obj))  # revalidates the embedded envelope
            inbound_by_tick.setdefault(int(line["tick"]), []).append(env)
        elif kind == "pose":
            pose_lines.append(line)

    for expected in pose_lines:
        tick = world.tick_count
        world.tick(inbound_by_tick.get(tick, ()))
        rec = world.pose_records[-1]
        got = _pose_line(rec)
        if got["tick"] != expected["tick"] or got["robot"] != expected["robot"] or got["local"] != expected["local"]:
            raise ReplayDivergenceError(
                f"replay diverged at tick {expected['tick']}: expected {expected}, got {got}",
                tick=int(expected["tick"]),
            )

    final_hash = world.state_hash()
    if final_hash != header["final_hash"]:
        raise ReplayDivergenceError(
            f"final hash mismatch: log={header['final_hash']} replay={final_hash}",
            tick=world.tick_count,
        )
    return final_hash


def metrics_from_log(log_path: str | Path) -> MetricsReport:
    """Recompute the metrics report from a log alone (independent of the run)."""
    header, body = read_log(log_path)
    records: list[PoseRecord] = []
    for line in body:
        if line.get("kind") == "pose":
            r = line["robot"]
            a = line["local"]
            records.append((int(line["tick"]), r[0], r[1], r[2], a[0], a[1], a[2]))
    cfg = SimConfig().merged(header["config"])
    sc = header["scenario"]
    completed = bool(header["completed"])
    ticks = int(header["ticks"])
    return report_from_records(
        records,
        task_time_s=ticks * TICK_DT_S,
        condition=sc["condition"],
        layout_id=sc["layout_id"],
        seed=sc["seed"],
        leader=sc["leader"],
        completed=completed,
        cell_m=cfg.grid_cell_m,
    )


# ---------------------------------------------------------------------------
# Condition sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    condition: str
    leader: str
    runs: int
    mean_task_time_s: float
    mean_distance_m: float
    mean_overlap: float
    incomplete: int


def compare_conditions(
    layout_ids: Sequence[int],
    seeds: Sequence[int],
    cfg: SimConfig | None = None,
    leaders: Sequence[str] = (LOCAL, REMOTE),
    conditions: Sequence[str] = CONDITIONS,
) -> list[SweepRow]:
    """Per-condition x per-leader means over a layout/seed grid."""
    cfg = cfg or SimConfig()
    rows: list[SweepRow] = []
    for condition in conditions:
        for leader in leaders:
            reports: list[MetricsReport] = []
            for layout_id in layout_ids:
                for seed in seeds:
                    scenario = bundled_layout(layout_id, condition=condition, seed=seed, leader=leader)
                    reports.append(run_experiment(scenario, cfg).report)
            rows.append(
                SweepRow(
                    condition=condition,
                    leader=leader,
                    runs=len(reports),
                    mean_task_time_s=_mean([r.task_time_s for r in reports]),
                    mean_distance_m=_mean([r.mean_distance_m for r in reports]),
                    mean_overlap=_mean([r.trajectory_overlap for r in reports]),
                    incomplete=sum(1 for r in reports if not r.completed),
                )
            )
    return rows


def _mean(values: Iterable[float]) -> float:
    values = list(values)
    return sum(values) / len(values) if values else math.nan


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["condition", "leader", "runs", "mean_task_time_s", "mean_distance_m", "mean_overlap", "incomplete"]
        )
        for row in rows:
            writer.writerow(
                [
                    row.condition,
                    row.leader,
                    row.runs,
                    f"{row.mean_task_time_s:.3f}",
                    f"{row.mean_distance_m:.4f}",
                    f"{row.mean_overlap:.4f}",
                    row.incomplete,
                ]
            )


def format_sweep_table(rows: Sequence[SweepRow]) -> str:
    lines = [
        f"{'condition':<10} {'leader':<7} {'runs':>5} {'task_time_s':>12} {'mean_dist_m':>12} {'overlap':>8} {'incomplete':>10}"
    ]
    for row in rows:
        lines.append(
            f"{row.condition:<10} {row.leader:<7} {row.runs:>5} "
            f"{row.mean_task_time_s:>12.1f} {row.mean_distance_m:>12.3f} "
            f"{row.mean_overlap:>8.3f} {row.incomplete:>10}"
        )
    return "\n".join(lines)
