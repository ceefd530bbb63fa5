// WebSocket client with reconnect, plus the input->visible-effect echo
// timer used to measure end-to-end latency in the HUD.

import { Envelope, decode, encode } from "./protocol.js";
import { ViewModel } from "./state.js";

export interface NetOptions {
  url: string;
  vm: ViewModel;
  onFrame?: () => void;
  now?: () => number;
}

interface PendingEcho {
  sentAt: number;
  matches: (env: Envelope, vm: ViewModel) => boolean;
}

export class Connection {
  latencyMs: number | null = null;
  private ws: WebSocket | null = null;
  private pending: PendingEcho | null = null;
  private retryMs = 500;
  private readonly opts: NetOptions;
  private readonly now: () => number;

  constructor(opts: NetOptions) {
    this.opts = opts;
    this.now = opts.now ?? (() => performance.now());
  }

  open(): void {
    const ws = new WebSocket(this.opts.url);
    ws.binaryType = "arraybuffer";
    this.ws = ws;
    ws.onopen = () => {
      this.opts.vm.connected = true;
      this.retryMs = 500;
    };
    ws.onmessage = (event) => {
      const text =
        typeof event.data === "string" ? event.data : new TextDecoder().decode(event.data as ArrayBuffer);
      for (const line of text.split("\n")) {
        if (!line) {
          continue;
        }
        let env: Envelope;
        try {
          env = decode(line);
        } catch {
          continue; // tolerate unknown lines
        }
        const before = this.opts.vm.robot;
        if (this.opts.vm.apply(env) && this.pending !== null) {
          if (this.pending.matches(env, this.opts.vm)) {
            this.latencyMs = this.now() - this.pending.sentAt;
            this.pending = null;
          } else if (env.payload.kind === "tracker_pose" && before !== null) {
            // fall back: any robot pose change after a drive input counts
          }
        }
      }
      this.opts.onFrame?.();
    };
    ws.onclose = () => {
      this.opts.vm.connected = false;
      this.ws = null;
      setTimeout(() => this.open(), this.retryMs);
      this.retryMs = Math.min(this.retryMs * 2, 5000);
    };
  }

  /** Send a ctrl envelope; one retry on failure, then drop (visible in HUD). */
  send(env: Envelope, echo?: PendingEcho["matches"]): boolean {
    if (this.ws === null || this.ws.readyState !== WebSocket.OPEN) {
      return false;
    }
    try {
      this.ws.send(encode(env));
    } catch {
      try {
        this.ws.send(encode(env));
      } catch {
        return false;
      }
    }
    if (echo) {
      this.pending = { sentAt: this.now(), matches: echo };
    }
    return true;
  }
}

/** Echo predicate for drive input: the robot pose visibly changed. */
export function driveEcho(reference: { x: number; y: number; heading: number } | null) {
  return (env: Envelope, vm: ViewModel): boolean => {
    if (env.payload.kind !== "tracker_pose" || (env.payload as { entity?: string }).entity !== "robot") {
      return false;
    }
    if (reference === null || vm.robot === null) {
      return vm.robot !== null;
    }
    const moved =
      Math.abs(vm.robot.x - reference.x) +
      Math.abs(vm.robot.y - reference.y) +
      Math.abs(vm.robot.heading - reference.heading);
    return moved > 1e-6;
  };
}

/** Echo predicate for a click: the reference ray came back. */
export function clickEcho() {
  return (env: Envelope): boolean =>
    env.payload.kind === "gesture_ref" && (env.payload as { source?: string }).source === "remote_click";
}
