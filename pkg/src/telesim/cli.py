"""Command-line entry point: run, replay, compare, serve.

Exit codes: 0 ok, 2 route did not complete before the time cap,
3 replay divergence.
"""

from __future__ import annotations

import json
import sys

import click

from .config import load_config
from .errors import ParseError, ReplayDivergenceError, ScenarioError
from .runner import compare_conditions, format_sweep_table, replay as replay_log, run_experiment, write_sweep_csv
from .scenario import CONDITIONS, LOCAL, REMOTE, bundled_layout, load_scenario

EXIT_OK = 0
EXIT_INCOMPLETE = 2
EXIT_DIVERGENCE = 3


def _resolve_scenario(scenario_path, layout, condition, seed, leader):
    if scenario_path is not None:
        return load_scenario(scenario_path, condition=condition, seed=seed, leader=leader)
    return bundled_layout(layout, condition=condition or "teleaware", seed=seed or 0, leader=leader or LOCAL)


@click.group()
def main():
    """Telepresence-robot collaborative locomotion simulator."""


@main.command()
@click.option("--scenario", "scenario_path", type=click.Path(exists=True), help="Scenario TOML file.")
@click.option("--layout", type=click.IntRange(1, 4), default=1, show_default=True, help="Bundled layout id.")
@click.option("--condition", type=click.Choice(CONDITIONS), default=None, help="Override the feature condition.")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--leader", type=click.Choice([LOCAL, REMOTE]), default=None, help="Override who leads the tour.")
@click.option("--log", "log_path", type=click.Path(), default=None, help="Write the NDJSON event log here.")
@click.option("--json", "as_json", is_flag=True, help="Print the metrics report as JSON.")
def run(scenario_path, layout, condition, seed, leader, log_path, as_json):
    """Run one scripted experiment and print its metrics."""
    cfg = load_config()
    try:
        scenario = _resolve_scenario(scenario_path, layout, condition, seed, leader)
    except ScenarioError as exc:
        raise click.ClickException(str(exc))
    result = run_experiment(scenario, cfg, log_path=log_path)
    report = result.report
    if as_json:
        click.echo(json.dumps(report.to_dict(), sort_keys=True))
    else:
        click.echo(
            f"layout={report.layout_id} seed={report.seed} condition={report.condition} leader={report.leader}"
        )
        click.echo(
            f"task_time={report.task_time_s:.1f}s mean_distance={report.mean_distance_m:.3f}m "
            f"overlap={report.trajectory_overlap:.3f} completed={report.completed}"
        )
        click.echo(f"final_hash={result.final_hash}")
    if not report.completed:
        sys.exit(EXIT_INCOMPLETE)


@main.command()
@click.option("--log", "log_path", type=click.Path(exists=True), required=True, help="Event log to replay.")
def replay(log_path):
    """Replay an event log and verify the recorded world-state hash."""
    try:
        final_hash = replay_log(log_path)
    except ReplayDivergenceError as exc:
        click.echo(f"replay divergence: {exc}", err=True)
        sys.exit(EXIT_DIVERGENCE)
    except ParseError as exc:
        click.echo(f"log parse error: {exc}", err=True)
        sys.exit(EXIT_DIVERGENCE)
    click.echo(f"replay ok final_hash={final_hash}")


def _parse_range(text: str) -> list[int]:
    if "-" in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part]


@main.command()
@click.option("--layouts", default="1-4", show_default=True, help="Layout ids, e.g. 1-4 or 1,3.")
@click.option("--seeds", type=int, default=20, show_default=True, help="Seeds 0..N-1 per layout.")
@click.option("--leaders", default="local,remote", show_default=True, help="Leader roles to sweep.")
@click.option("--csv", "csv_path", type=click.Path(), default=None, help="Also write the table as CSV.")
def compare(layouts, seeds, leaders, csv_path):
    """Sweep conditions over layouts and seeds; print per-condition means."""
    cfg = load_config()
    layout_ids = _parse_range(layouts)
    leader_list = [part for part in leaders.split(",") if part]
    rows = compare_conditions(layout_ids, range(seeds), cfg, leaders=leader_list)
    click.echo(format_sweep_table(rows))
    if csv_path:
        write_sweep_csv(rows, csv_path)
        click.echo(f"wrote {csv_path}")


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--scenario", "scenario_path", type=click.Path(exists=True), default=None)
@click.option("--layout", type=click.IntRange(1, 4), default=1, show_default=True)
@click.option("--condition", type=click.Choice(CONDITIONS), default="teleaware", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--delay-ms", type=float, default=50.0, show_default=True, help="One-way link delay.")
@click.option("--jitter-ms", type=float, default=0.0, show_default=True)
@click.option("--drop", type=float, default=0.0, show_default=True, help="Link drop probability.")
@click.option("--log", "log_path", type=click.Path(), default=None, help="Write the live session log here.")
def serve(port, host, scenario_path, layout, condition, seed, delay_ms, jitter_ms, drop, log_path):
    """Start the WebSocket endpoint for the operator console."""
    import uvicorn

    from .protocol import LinkModel
    from .server import create_app

    cfg = load_config()
    try:
        scenario = _resolve_scenario(scenario_path, layout, condition, seed, None)
    except ScenarioError as exc:
        raise click.ClickException(str(exc))
    link = LinkModel(one_way_delay_ms=delay_ms, jitter_ms=jitter_ms, drop_prob=drop, seed=seed)
    app = create_app(scenario, cfg, link, log_path=log_path)
    click.echo(f"serving ws://{host}:{port}/ws (condition={condition}, layout={scenario.layout_id})")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
