"""Runtime configuration: tunables for motion, awareness, referencing and the sim loop.

Defaults can be overridden from a TOML file named by the SIM_CONFIG
environment variable, or programmatically via SimConfig.merged().
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass
from typing import Any, Mapping

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

# Fixed simulation timestep: 50 Hz.
TICK_MS = 20
TICK_DT_S = TICK_MS / 1000.0

SIM_CONFIG_ENV = "SIM_CONFIG"


@dataclass(frozen=True)
class SimConfig:
    # Drive limits (near pedestrian pace; the robot carries a person-height screen).
    v_max: float = 1.0  # m/s
    omega_max: float = math.pi / 2.0  # rad/s

    # Shoulder tap: automatic rotation toward the pressed side.
    tap_angle_deg: float = 90.0
    tap_cancelable: bool = False  # when True, operator input aborts the rotation
    rotation_done_deg: float = 1.0

    # Movement-state classifier (hysteresis band between lo and hi).
    move_hi_mps: float = 0.20
    move_lo_mps: float = 0.10
    window_s: float = 0.5

    # Pointing gesture detection and shared references.
    elbow_min_deg: float = 160.0
    debounce_frames: int = 5
    gesture_ttl_s: float = 3.0
    click_ttl_s: float = 5.0
    ray_extent_m: float = 3.0

    # Screen anchoring.
    head_row_frac: float = 0.35

    # Scripted task behavior.
    walk_speed: float = 0.8  # m/s, leader/follower agents
    dwell_s: float = 5.0  # leader stop at each content board
    point_s: float = 2.0  # leader points at the board at the start of a dwell
    lag_gap_m: float = 2.5  # leader pauses when the partner falls this far behind
    target_gap_m: float = 1.2  # follower holds this gap behind the leader
    search_after_s: float = 2.0  # follower robot scans after losing sight this long
    tap_cooldown_s: float = 10.0

    # Experiment harness.
    telemetry_hz: float = 20.0
    timeout_s: float = 600.0
    grid_cell_m: float = 0.25

    def merged(self, overrides: Mapping[str, Any]) -> "SimConfig":
        """Return a copy with the given fields replaced; unknown keys are rejected."""
        if not overrides:
            return self
        valid = {f.name for f in dataclasses.fields(self)}
        unknown = set(overrides) - valid
        if unknown:
            raise KeyError(f"unknown config keys: {sorted(unknown)}")
        return dataclasses.replace(self, **dict(overrides))

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def load_config(environ: Mapping[str, str] | None = None) -> SimConfig:
    """Build the effective config, applying SIM_CONFIG file overrides if set."""
    env = os.environ if environ is None else environ
    cfg = SimConfig()
    path = env.get(SIM_CONFIG_ENV)
    if path:
        with open(path, "rb") as fh:
            cfg = cfg.merged(tomllib.load(fh))
    return cfg
