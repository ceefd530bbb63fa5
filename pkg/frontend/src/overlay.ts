// Overlay placement: a pure function of the telemetry snapshot. Positions
// come from the indicator payload itself (the simulator's awareness module
// is the single source of truth); this module only maps payloads to
// drawable primitives and never recomputes geometry from raw poses.

import { GestureRefPayload, IndicatorPayload } from "./protocol.js";
import { Pose } from "./state.js";

export interface IconPlacement {
  kind: "icon";
  x: number;
  y: number;
  label: string;
  movement: "stationary" | "moving";
}

export interface ArrowPlacement {
  kind: "arrow";
  x: number;
  edge: "left" | "right";
  bearing: number;
  label: string;
  movement: "stationary" | "moving";
}

export type IndicatorPlacement = IconPlacement | ArrowPlacement;

export function distanceLabel(distanceM: number): string {
  return `${(Math.round(distanceM * 10) / 10).toFixed(1)} m`;
}

export function placeIndicator(ind: IndicatorPayload, imageWidth: number): IndicatorPlacement {
  const label = distanceLabel(ind.distance_m);
  if (ind.mode === "in_view") {
    return {
      kind: "icon",
      x: ind.u_px ?? 0,
      y: ind.v_px ?? 0,
      label,
      movement: ind.movement,
    };
  }
  const edgeU = ind.edge_u_px ?? 0;
  return {
    kind: "arrow",
    x: edgeU,
    edge: edgeU <= imageWidth / 2 ? "left" : "right",
    bearing: ind.arrow_bearing_rad ?? 0,
    label,
    movement: ind.movement,
  };
}

// ---------------------------------------------------------------------------
// Ground projection for the synthetic first-person view. The camera sits at
// CAMERA_HEIGHT_M above the floor looking level; a floor point at range d and
// pan-corrected bearing beta maps to:
//   u = (W/2) * (1 - tan(beta) / tan(hfov/2))
//   v = v_horizon + focal * CAMERA_HEIGHT_M / (d * cos(beta))
// ---------------------------------------------------------------------------

export const CAMERA_HEIGHT_M = 1.0;
export const HORIZON_FRAC = 0.5;

export interface ViewParams {
  imageWidth: number;
  imageHeight: number;
  hfov: number;
  robot: Pose;
  panRad?: number;
}

function wrapAngle(a: number): number {
  let r = a % (2 * Math.PI);
  if (r <= -Math.PI) r += 2 * Math.PI;
  if (r > Math.PI) r -= 2 * Math.PI;
  return r;
}

export function groundToScreen(view: ViewParams, x: number, y: number): { u: number; v: number } | null {
  const dx = x - view.robot.x;
  const dy = y - view.robot.y;
  const dist = Math.hypot(dx, dy);
  if (dist < 1e-9) {
    return null;
  }
  const beta = wrapAngle(Math.atan2(dy, dx) - view.robot.heading - (view.panRad ?? 0));
  const half = view.hfov / 2;
  if (Math.abs(beta) > half) {
    return null;
  }
  const focal = view.imageWidth / 2 / Math.tan(half);
  const u = (view.imageWidth / 2) * (1 - Math.tan(beta) / Math.tan(half));
  const v = HORIZON_FRAC * view.imageHeight + (focal * CAMERA_HEIGHT_M) / (dist * Math.cos(beta));
  return { u, v };
}

/** Sampled polyline of a floor ray for drawing, clipped to the FOV. */
export function rayPolyline(view: ViewParams, ref: GestureRefPayload, steps = 24): Array<{ u: number; v: number }> {
  const points: Array<{ u: number; v: number }> = [];
  for (let i = 1; i <= steps; i++) {
    const d = (ref.extent_m * i) / steps;
    const x = ref.origin_x_m + d * Math.cos(ref.azimuth_rad);
    const y = ref.origin_y_m + d * Math.sin(ref.azimuth_rad);
    const p = groundToScreen(view, x, y);
    if (p !== null) {
      points.push(p);
    }
  }
  return points;
}
