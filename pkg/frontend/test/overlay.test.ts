// Overlay conformance: replaying a recorded telemetry log must place every
// indicator exactly where the simulator's awareness module computed it.

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { placeIndicator } from "../src/overlay.js";
import { decode } from "../src/protocol.js";
import { ViewModel } from "../src/state.js";

interface FixtureStep {
  line: string;
  expected: Record<string, unknown> | null;
  stale?: boolean;
}

interface Fixture {
  image_width: number;
  image_height: number;
  steps: FixtureStep[];
}

const FIXTURE_PATH = fileURLToPath(new URL("./fixtures/telemetry_overlay.json", import.meta.url));
const fixture: Fixture = JSON.parse(readFileSync(FIXTURE_PATH, "utf-8"));

function currentPlacement(vm: ViewModel): Record<string, unknown> | null {
  if (vm.indicator === null) {
    return null;
  }
  const p = placeIndicator(vm.indicator, fixture.image_width);
  if (p.kind === "icon") {
    return { kind: "icon", x: p.x, y: p.y, label: p.label, movement: p.movement };
  }
  return { kind: "arrow", x: p.x, edge: p.edge, bearing: p.bearing, label: p.label, movement: p.movement };
}

describe("overlay placement from telemetry", () => {
  it("replays the recorded log to pixel-identical placements", () => {
    const vm = new ViewModel();
    for (const [i, step] of fixture.steps.entries()) {
      vm.apply(decode(step.line));
      const got = currentPlacement(vm);
      expect(got, `step ${i}`).toEqual(step.expected);
    }
  });

  it("discards stale frames by sequence number", () => {
    const staleSteps = fixture.steps.filter((s) => s.stale);
    expect(staleSteps.length).toBeGreaterThan(0);
    const vm = new ViewModel();
    let beforeStale: Record<string, unknown> | null = null;
    for (const step of fixture.steps) {
      if (step.stale) {
        beforeStale = currentPlacement(vm);
        const fresh = vm.apply(decode(step.line));
        expect(fresh).toBe(false);
        expect(currentPlacement(vm)).toEqual(beforeStale);
      } else {
        vm.apply(decode(step.line));
      }
    }
  });

  it("placement is a pure function of the snapshot", () => {
    const vm = new ViewModel();
    for (const step of fixture.steps) {
      vm.apply(decode(step.line));
    }
    const a = currentPlacement(vm);
    const b = currentPlacement(vm);
    expect(a).toEqual(b);
  });

  it("arrow side follows the payload edge", () => {
    const vm = new ViewModel();
    vm.apply(
      decode(
        JSON.stringify({
          channel: "telemetry",
          payload: {
            kind: "indicator",
            mode: "out_of_view",
            edge_u_px: 0.0,
            arrow_bearing_rad: 1.3,
            distance_m: 2.0,
            movement: "moving",
          },
          seq: 1,
          t_ms: 0,
        }),
      ),
    );
    const left = placeIndicator(vm.indicator!, fixture.image_width);
    expect(left.kind).toBe("arrow");
    expect((left as { edge: string }).edge).toBe("left");

    vm.apply(
      decode(
        JSON.stringify({
          channel: "telemetry",
          payload: {
            kind: "indicator",
            mode: "out_of_view",
            edge_u_px: fixture.image_width,
            arrow_bearing_rad: -1.3,
            distance_m: 2.0,
            movement: "moving",
          },
          seq: 2,
          t_ms: 0,
        }),
      ),
    );
    const right = placeIndicator(vm.indicator!, fixture.image_width);
    expect((right as { edge: string }).edge).toBe("right");
  });

  it("expired references are not drawn", () => {
    const vm = new ViewModel();
    vm.apply(
      decode(
        JSON.stringify({
          channel: "event",
          payload: {
            kind: "gesture_ref",
            source: "remote_click",
            origin_x_m: 1.0,
            origin_y_m: 1.0,
            azimuth_rad: 0.0,
            extent_m: 3.0,
            expires_at_ms: 5000,
          },
          seq: 1,
          t_ms: 100,
        }),
      ),
    );
    expect(vm.activeRefs(4999).length).toBe(1);
    expect(vm.activeRefs(5000).length).toBe(0);
  });
});
