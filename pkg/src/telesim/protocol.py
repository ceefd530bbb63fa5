"""Wire protocol between the operator console and the local-site simulator.

Envelopes are single lines of canonical JSON (sorted keys, no whitespace,
UTF-8, LF-terminated) so equal envelopes always serialize to identical
bytes. Three channels carry typed payloads:

    ctrl      console -> sim   drive_keys, pan_tilt, click
    telemetry sim -> console   tracker_pose, indicator
    event     sim <-> console  tap, gesture_ref, session

Sequence numbers are strictly increasing per (sender, channel); a decoder
never rejects out-of-order envelopes, it just flags them.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any

from .awareness import InView, PartnerIndicator
from .errors import EncodeError, ParseError, ProtocolVersionError
from .sharedref import PointingReference

CTRL = "ctrl"
TELEMETRY = "telemetry"
EVENT = "event"

CHANNELS = (CTRL, TELEMETRY, EVENT)

# Payload kind -> channel it is allowed to ride on.
KIND_CHANNEL = {
    "drive_keys": CTRL,
    "pan_tilt": CTRL,
    "click": CTRL,
    "tracker_pose": TELEMETRY,
    "indicator": TELEMETRY,
    "tap": EVENT,
    "gesture_ref": EVENT,
    "session": EVENT,
}


@dataclass(frozen=True)
class Envelope:
    """One wire message: channel, per-channel sequence number, sim time, payload."""

    channel: str
    seq: int
    t_ms: int
    payload: dict[str, Any]

    @property
    def kind(self) -> str:
        return self.payload.get("kind", "")


def _validate(env: Envelope) -> None:
    if env.channel not in CHANNELS:
        raise ProtocolVersionError(f"unknown channel {env.channel!r}")
    if not isinstance(env.payload, dict) or "kind" not in env.payload:
        raise EncodeError("payload must be a dict with a 'kind' field")
    kind = env.payload["kind"]
    expected = KIND_CHANNEL.get(kind)
    if expected is None:
        raise ProtocolVersionError(f"unknown payload kind {kind!r}")
    if expected != env.channel:
        raise ProtocolVersionError(f"payload kind {kind!r} not allowed on channel {env.channel!r}")
    if not isinstance(env.seq, int) or isinstance(env.seq, bool) or env.seq < 0:
        raise EncodeError(f"seq must be a non-negative integer, got {env.seq!r}")
    if not isinstance(env.t_ms, int) or isinstance(env.t_ms, bool) or env.t_ms < 0:
        raise EncodeError(f"t_ms must be a non-negative integer, got {env.t_ms!r}")


def encode(env: Envelope) -> bytes:
    """Serialize an envelope to one canonical NDJSON line (LF-terminated)."""
    _validate(env)
    obj = {"channel": env.channel, "payload": env.payload, "seq": env.seq, "t_ms": env.t_ms}
    try:
        text = json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
    except (TypeError, ValueError) as exc:
        raise EncodeError(f"envelope not serializable: {exc}") from exc
    return text.encode("utf-8") + b"\n"


def decode(data: bytes | str) -> Envelope:
    """Parse one NDJSON line back into an Envelope.

    Malformed input raises ParseError; well-formed input with an unknown
    channel or payload kind raises ProtocolVersionError.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid utf-8: {exc}") from exc
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed envelope: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"envelope must be a JSON object, got {type(obj).__name__}")
    missing = {"channel", "payload", "seq", "t_ms"} - obj.keys()
    if missing:
        raise ParseError(f"envelope missing fields: {sorted(missing)}")
    channel = obj["channel"]
    payload = obj["payload"]
    seq = obj["seq"]
    t_ms = obj["t_ms"]
    if not isinstance(payload, dict):
        raise ParseError("payload must be a JSON object")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        raise ParseError(f"seq must be a non-negative integer, got {seq!r}")
    if not isinstance(t_ms, int) or isinstance(t_ms, bool) or t_ms < 0:
        raise ParseError(f"t_ms must be a non-negative integer, got {t_ms!r}")
    if channel not in CHANNELS:
        raise ProtocolVersionError(f"unknown channel {channel!r}")
    kind = payload.get("kind")
    expected = KIND_CHANNEL.get(kind)
    if expected is None:
        raise ProtocolVersionError(f"unknown payload kind {kind!r}")
    if expected != channel:
        raise ProtocolVersionError(f"payload kind {kind!r} not allowed on channel {channel!r}")
    return Envelope(channel=channel, seq=seq, t_ms=t_ms, payload=payload)


class SequenceTracker:
    """Tracks per-channel sequence numbers on the receive side.

    observe() returns True when the envelope arrived out of order (seq not
    strictly greater than the last seen); the message is still delivered.
    """

    def __init__(self):
        self._last: dict[str, int] = {}

    def observe(self, env: Envelope) -> bool:
        last = self._last.get(env.channel)
        reorder = last is not None and env.seq <= last
        if last is None or env.seq > last:
            self._last[env.channel] = env.seq
        return reorder


class SequenceAllocator:
    """Hands out strictly increasing sequence numbers per channel (send side)."""

    def __init__(self):
        self._next: dict[str, int] = {}

    def next(self, channel: str) -> int:
        seq = self._next.get(channel, 1)
        self._next[channel] = seq + 1
        return seq


# ---------------------------------------------------------------------------
# Payload builders
# ---------------------------------------------------------------------------

def drive_keys(w: bool = False, a: bool = False, s: bool = False, d: bool = False) -> dict[str, Any]:
    return {"kind": "drive_keys", "w": bool(w), "a": bool(a), "s": bool(s), "d": bool(d)}


def pan_tilt(pan_rad: float, tilt_rad: float) -> dict[str, Any]:
    return {"kind": "pan_tilt", "pan_rad": float(pan_rad), "tilt_rad": float(tilt_rad)}


def click(u_px: float) -> dict[str, Any]:
    return {"kind": "click", "u_px": u_px}


def tracker_pose(entity: str, x: float, y: float, heading: float) -> dict[str, Any]:
    return {"kind": "tracker_pose", "entity": entity, "x_m": x, "y_m": y, "heading_rad": heading}


def indicator(ind: PartnerIndicator) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "kind": "indicator",
        "distance_m": ind.distance_m,
        "movement": ind.movement.value,
    }
    if isinstance(ind.mode, InView):
        payload["mode"] = "in_view"
        payload["u_px"] = ind.mode.u
        payload["v_px"] = ind.mode.v
    else:
        payload["mode"] = "out_of_view"
        payload["edge_u_px"] = ind.mode.edge_u
        payload["arrow_bearing_rad"] = ind.mode.arrow_bearing
    return payload


def tap(side: str) -> dict[str, Any]:
    return {"kind": "tap", "side": side}


def gesture_ref(
    ref: PointingReference,
    expires_at_ms: int,
    touch_line: tuple[tuple[float, float], tuple[float, float]] | None = None,
) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "kind": "gesture_ref",
        "source": ref.source.value,
        "origin_x_m": ref.ray.origin_x,
        "origin_y_m": ref.ray.origin_y,
        "azimuth_rad": ref.ray.azimuth,
        "extent_m": ref.ray.extent,
        "expires_at_ms": expires_at_ms,
    }
    if touch_line is not None:
        payload["touch_line_px"] = [list(touch_line[0]), list(touch_line[1])]
    return payload


def session(action: str, **extra: Any) -> dict[str, Any]:
    payload: dict[str, Any] = {"kind": "session", "action": action}
    payload.update(extra)
    return payload


# ---------------------------------------------------------------------------
# Link model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinkModel:
    """One-way latency, jitter and loss parameters; deterministic per seed."""

    one_way_delay_ms: float = 50.0
    jitter_ms: float = 0.0
    drop_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.one_way_delay_ms < 0.0 or self.jitter_ms < 0.0:
            raise ValueError("delay and jitter must be non-negative")
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ValueError(f"drop_prob must be in [0, 1], got {self.drop_prob}")


@dataclass
class Link:
    """Stateful link instance: seeded PRNG plus per-channel FIFO clamping."""

    model: LinkModel
    _rng: random.Random = field(init=False)
    _last_deliver: dict[str, float] = field(init=False, default_factory=dict)

    def __post_init__(self):
        self._rng = random.Random(self.model.seed)

    def transmit(self, env: Envelope, now_ms: float) -> float | None:
        """Schedule an envelope: returns its delivery time, or None when dropped.

        Always consumes two PRNG draws (drop, jitter) so the schedule is a
        pure function of the seed and the send sequence. Delivery order is
        FIFO per channel: deliver_at never precedes the previous delivery
        on the same channel.
        """
        u_drop = self._rng.random()
        jitter = self._rng.uniform(-self.model.jitter_ms, self.model.jitter_ms)
        if u_drop < self.model.drop_prob:
            return None
        deliver_at = now_ms + max(0.0, self.model.one_way_delay_ms + jitter)
        prev = self._last_deliver.get(env.channel)
        if prev is not None and deliver_at < prev:
            deliver_at = prev
        self._last_deliver[env.channel] = deliver_at
        return deliver_at
