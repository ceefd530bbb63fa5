// ViewModel: the latest telemetry snapshot plus connection and input state.
// Overlay drawing reads only this snapshot; stale frames are discarded by
// per-channel sequence number.

import {
  Envelope,
  GestureRefPayload,
  IndicatorPayload,
  SequenceTracker,
  SessionPayload,
  TrackerPosePayload,
} from "./protocol.js";

export interface Pose {
  x: number;
  y: number;
  heading: number;
}

export interface SceneInfo {
  condition: string;
  arena: { width: number; height: number };
  boards: Array<{ id: string; x: number; y: number; facing_rad: number; content: boolean }>;
  imageWidth: number;
  imageHeight: number;
  hfov: number;
}

export class ViewModel {
  scene: SceneInfo | null = null;
  robot: Pose | null = null;
  local: Pose | null = null;
  indicator: IndicatorPayload | null = null;
  refs: Map<string, GestureRefPayload> = new Map(); // keyed by source
  simTimeMs = 0;
  connected = false;

  private tracker = new SequenceTracker();

  /** Apply one incoming envelope; returns false when it was stale. */
  apply(env: Envelope): boolean {
    if (!this.tracker.fresh(env) && env.seq !== 0) {
      return false; // seq 0 is the session hello, outside the stream
    }
    this.simTimeMs = Math.max(this.simTimeMs, env.t_ms);
    const payload = env.payload;
    switch (payload.kind) {
      case "tracker_pose": {
        const p = payload as unknown as TrackerPosePayload;
        const pose = { x: p.x_m, y: p.y_m, heading: p.heading_rad };
        if (p.entity === "robot") {
          this.robot = pose;
        } else {
          this.local = pose;
        }
        break;
      }
      case "indicator":
        this.indicator = payload as unknown as IndicatorPayload;
        break;
      case "gesture_ref": {
        const ref = payload as unknown as GestureRefPayload;
        this.refs.set(ref.source, ref);
        break;
      }
      case "session": {
        const s = payload as unknown as SessionPayload;
        if (s.action === "hello") {
          this.scene = {
            condition: s.condition ?? "teleaware",
            arena: s.arena ?? { width: 8, height: 8 },
            boards: s.boards ?? [],
            imageWidth: s.image_width ?? 960,
            imageHeight: s.image_height ?? 540,
            hfov: s.hfov_rad ?? (2 * Math.PI) / 3,
          };
        }
        break;
      }
      default:
        break; // tap and future kinds need no snapshot state
    }
    return true;
  }

  /** References still alive at the given sim time. */
  activeRefs(simTimeMs: number = this.simTimeMs): GestureRefPayload[] {
    const out: GestureRefPayload[] = [];
    for (const ref of this.refs.values()) {
      if (ref.expires_at_ms > simTimeMs) {
        out.push(ref);
      }
    }
    return out;
  }
}
