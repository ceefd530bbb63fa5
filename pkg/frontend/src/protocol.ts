// Wire protocol: NDJSON envelopes over a WebSocket, canonical encoding
// (sorted keys, no whitespace, LF-terminated) matching the simulator side.

export type Channel = "ctrl" | "telemetry" | "event";

export interface Envelope {
  channel: Channel;
  seq: number;
  t_ms: number;
  payload: Record<string, unknown> & { kind: string };
}

export type DriveKeysPayload = {
  kind: "drive_keys";
  w: boolean;
  a: boolean;
  s: boolean;
  d: boolean;
}

export type ClickPayload = {
  kind: "click";
  u_px: number;
}

export type PanTiltPayload = {
  kind: "pan_tilt";
  pan_rad: number;
  tilt_rad: number;
}

export type TrackerPosePayload = {
  kind: "tracker_pose";
  entity: "robot" | "local";
  x_m: number;
  y_m: number;
  heading_rad: number;
}

export type IndicatorPayload = {
  kind: "indicator";
  mode: "in_view" | "out_of_view";
  u_px?: number;
  v_px?: number;
  edge_u_px?: number;
  arrow_bearing_rad?: number;
  distance_m: number;
  movement: "stationary" | "moving";
}

export type GestureRefPayload = {
  kind: "gesture_ref";
  source: "local_gesture" | "remote_click";
  origin_x_m: number;
  origin_y_m: number;
  azimuth_rad: number;
  extent_m: number;
  expires_at_ms: number;
  touch_line_px?: [[number, number], [number, number]];
}

export type SessionPayload = {
  kind: "session";
  action: string;
  condition?: string;
  layout_id?: number;
  leader?: string;
  arena?: { width: number; height: number };
  boards?: Array<{ id: string; x: number; y: number; facing_rad: number; content: boolean }>;
  image_width?: number;
  image_height?: number;
  hfov_rad?: number;
}

export type TapPayload = {
  kind: "tap";
  side: "left" | "right";
}

// Recursively sort object keys so equal envelopes give identical bytes.
function canonical(value: unknown): string {
  if (value === null || typeof value === "number" || typeof value === "boolean") {
    return JSON.stringify(value);
  }
  if (typeof value === "string") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonical).join(",") + "]";
  }
  if (typeof value === "object") {
    const obj = value as Record<string, unknown>;
    const keys = Object.keys(obj).sort();
    return "{" + keys.map((k) => JSON.stringify(k) + ":" + canonical(obj[k])).join(",") + "}";
  }
  throw new Error(`not serializable: ${typeof value}`);
}

export function encode(env: Envelope): string {
  if (!Number.isFinite(env.seq) || !Number.isFinite(env.t_ms)) {
    throw new Error("seq and t_ms must be finite");
  }
  const obj = { channel: env.channel, payload: env.payload, seq: env.seq, t_ms: env.t_ms };
  return canonical(obj) + "\n";
}

export function decode(line: string): Envelope {
  const obj = JSON.parse(line) as Record<string, unknown>;
  if (
    typeof obj !== "object" ||
    obj === null ||
    typeof obj.channel !== "string" ||
    typeof obj.seq !== "number" ||
    typeof obj.t_ms !== "number" ||
    typeof obj.payload !== "object" ||
    obj.payload === null
  ) {
    throw new Error("malformed envelope");
  }
  return obj as unknown as Envelope;
}

// Strictly increasing sequence numbers per channel (send side).
export class SequenceAllocator {
  private next: Map<Channel, number> = new Map();

  take(channel: Channel): number {
    const seq = this.next.get(channel) ?? 1;
    this.next.set(channel, seq + 1);
    return seq;
  }
}

// Receive-side filter: true when the envelope is fresh (seq advances).
export class SequenceTracker {
  private last: Map<Channel, number> = new Map();

  fresh(env: Envelope): boolean {
    const prev = this.last.get(env.channel);
    if (prev !== undefined && env.seq <= prev) {
      return false;
    }
    this.last.set(env.channel, env.seq);
    return true;
  }
}
