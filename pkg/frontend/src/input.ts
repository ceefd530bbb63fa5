// Operator input: key-state diffs, canvas clicks and pan-tilt sliders
// become ctrl envelopes. Diff-based: holding a key emits nothing new, and
// W+D held together is one envelope with both flags, not two envelopes.

import { DriveKeysPayload, Envelope, SequenceAllocator, encode } from "./protocol.js";

export type Clock = () => number;

export interface KeyState {
  w: boolean;
  a: boolean;
  s: boolean;
  d: boolean;
}

const DRIVE_KEYS = ["w", "a", "s", "d"] as const;

export class InputEncoder {
  private keys: KeyState = { w: false, a: false, s: false, d: false };
  private pan = 0;
  private tilt = 0;
  private readonly seq: SequenceAllocator;
  private readonly clock: Clock;

  constructor(seq: SequenceAllocator, clock: Clock) {
    this.seq = seq;
    this.clock = clock;
  }

  private envelope(payload: Envelope["payload"]): Envelope {
    return {
      channel: "ctrl",
      seq: this.seq.take("ctrl"),
      t_ms: Math.round(this.clock()),
      payload,
    };
  }

  /** Key went down or up; returns an envelope only when the state changed. */
  setKey(key: string, down: boolean): Envelope | null {
    const name = key.toLowerCase() as (typeof DRIVE_KEYS)[number];
    if (!DRIVE_KEYS.includes(name) || this.keys[name] === down) {
      return null;
    }
    this.keys[name] = down;
    const payload: DriveKeysPayload = { kind: "drive_keys", ...this.keys };
    return this.envelope(payload);
  }

  /** Canvas click at image column u (pixels in camera-image coordinates). */
  click(uPx: number): Envelope {
    return this.envelope({ kind: "click", u_px: Math.round(uPx) });
  }

  /** Pan-tilt slider moved; returns null when nothing actually changed. */
  setPanTilt(panRad: number, tiltRad: number): Envelope | null {
    const pan = Math.round(panRad * 1e6) / 1e6;
    const tilt = Math.round(tiltRad * 1e6) / 1e6;
    if (pan === this.pan && tilt === this.tilt) {
      return null;
    }
    this.pan = pan;
    this.tilt = tilt;
    return this.envelope({ kind: "pan_tilt", pan_rad: pan, tilt_rad: tilt });
  }

  snapshotKeys(): KeyState {
    return { ...this.keys };
  }
}

/** Serialize a ctrl session to NDJSON bytes (used for the golden-log test). */
export function sessionToNdjson(envelopes: Envelope[]): string {
  return envelopes.map(encode).join("");
}
