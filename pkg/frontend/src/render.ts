// Canvas renderer: synthetic first-person camera view plus awareness
// overlays. Everything derives from the ViewModel snapshot.

import { groundToScreen, placeIndicator, rayPolyline, HORIZON_FRAC, ViewParams } from "./overlay.js";
import { ViewModel } from "./state.js";

export interface HudInfo {
  latencyMs: number | null;
  keys: string;
}

export function renderFrame(ctx: CanvasRenderingContext2D, vm: ViewModel, hud: HudInfo): void {
  const canvas = ctx.canvas;
  const W = canvas.width;
  const H = canvas.height;

  if (!vm.connected) {
    ctx.fillStyle = "#1a1a22";
    ctx.fillRect(0, 0, W, H);
    ctx.fillStyle = "#ffffff";
    ctx.font = "bold 28px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("connection lost - reconnecting...", W / 2, H / 2);
    ctx.textAlign = "left";
    return;
  }
  if (vm.scene === null || vm.robot === null) {
    ctx.fillStyle = "#1a1a22";
    ctx.fillRect(0, 0, W, H);
    ctx.fillStyle = "#aaaaaa";
    ctx.font = "16px sans-serif";
    ctx.fillText("waiting for telemetry...", 20, 30);
    return;
  }

  const view: ViewParams = {
    imageWidth: W,
    imageHeight: H,
    hfov: vm.scene.hfov,
    robot: vm.robot,
  };
  const horizon = HORIZON_FRAC * H;

  // sky and floor
  ctx.fillStyle = "#202536";
  ctx.fillRect(0, 0, W, horizon);
  ctx.fillStyle = "#39404f";
  ctx.fillRect(0, horizon, W, H - horizon);

  drawFloorGrid(ctx, view, vm);
  drawBoards(ctx, view, vm);
  drawPartner(ctx, view, vm);
  drawRefs(ctx, view, vm);
  drawIndicator(ctx, vm, W);
  drawHud(ctx, vm, hud, W, H);
}

function drawFloorGrid(ctx: CanvasRenderingContext2D, view: ViewParams, vm: ViewModel): void {
  const arena = vm.scene!.arena;
  ctx.strokeStyle = "rgba(255,255,255,0.15)";
  ctx.lineWidth = 1;
  for (let gx = 0; gx <= arena.width; gx += 1) {
    strokeGroundPolyline(ctx, view, samples(gx, 0, gx, arena.height));
  }
  for (let gy = 0; gy <= arena.height; gy += 1) {
    strokeGroundPolyline(ctx, view, samples(0, gy, arena.width, gy));
  }
}

function samples(x0: number, y0: number, x1: number, y1: number, n = 32): Array<[number, number]> {
  const pts: Array<[number, number]> = [];
  for (let i = 0; i <= n; i++) {
    pts.push([x0 + ((x1 - x0) * i) / n, y0 + ((y1 - y0) * i) / n]);
  }
  return pts;
}

function strokeGroundPolyline(ctx: CanvasRenderingContext2D, view: ViewParams, pts: Array<[number, number]>): void {
  let drawing = false;
  ctx.beginPath();
  for (const [x, y] of pts) {
    const p = groundToScreen(view, x, y);
    if (p === null) {
      drawing = false;
      continue;
    }
    if (!drawing) {
      ctx.moveTo(p.u, p.v);
      drawing = true;
    } else {
      ctx.lineTo(p.u, p.v);
    }
  }
  ctx.stroke();
}

function drawBoards(ctx: CanvasRenderingContext2D, view: ViewParams, vm: ViewModel): void {
  for (const board of vm.scene!.boards) {
    const base = groundToScreen(view, board.x, board.y);
    if (base === null) {
      continue;
    }
    const dist = Math.hypot(board.x - view.robot.x, board.y - view.robot.y);
    const heightPx = Math.min(180, 120 / Math.max(dist, 0.5));
    const widthPx = heightPx * 0.75;
    ctx.fillStyle = board.content ? "#c9b458" : "#777777";
    ctx.fillRect(base.u - widthPx / 2, base.v - heightPx, widthPx, heightPx);
    ctx.fillStyle = "#10131c";
    ctx.font = `${Math.max(10, heightPx / 4)}px sans-serif`;
    ctx.textAlign = "center";
    ctx.fillText(board.id, base.u, base.v - heightPx / 2);
    ctx.textAlign = "left";
  }
}

function drawPartner(ctx: CanvasRenderingContext2D, view: ViewParams, vm: ViewModel): void {
  if (vm.local === null) {
    return;
  }
  const base = groundToScreen(view, vm.local.x, vm.local.y);
  if (base === null) {
    return; // blind spot: only the indicator arrow communicates the partner
  }
  const dist = Math.hypot(vm.local.x - view.robot.x, vm.local.y - view.robot.y);
  const heightPx = Math.min(260, 170 / Math.max(dist, 0.5));
  ctx.fillStyle = "#7fd1b9";
  // torso
  ctx.fillRect(base.u - heightPx * 0.12, base.v - heightPx * 0.6, heightPx * 0.24, heightPx * 0.45);
  // head
  ctx.beginPath();
  ctx.arc(base.u, base.v - heightPx * 0.72, heightPx * 0.12, 0, 2 * Math.PI);
  ctx.fill();
  // legs
  ctx.fillRect(base.u - heightPx * 0.1, base.v - heightPx * 0.15, heightPx * 0.08, heightPx * 0.15);
  ctx.fillRect(base.u + heightPx * 0.02, base.v - heightPx * 0.15, heightPx * 0.08, heightPx * 0.15);
}

function drawRefs(ctx: CanvasRenderingContext2D, view: ViewParams, vm: ViewModel): void {
  for (const ref of vm.activeRefs()) {
    const pts = rayPolyline(view, ref);
    if (pts.length >= 2) {
      ctx.strokeStyle = ref.source === "remote_click" ? "#ff9d5c" : "#6cb8ff";
      ctx.lineWidth = 4;
      ctx.beginPath();
      ctx.moveTo(pts[0].u, pts[0].v);
      for (const p of pts.slice(1)) {
        ctx.lineTo(p.u, p.v);
      }
      ctx.stroke();
      ctx.lineWidth = 1;
    }
    if (ref.touch_line_px) {
      const [[x0, y0], [x1, y1]] = ref.touch_line_px;
      ctx.strokeStyle = "#6cb8ff";
      ctx.lineWidth = 3;
      ctx.setLineDash([8, 6]);
      ctx.beginPath();
      ctx.moveTo(x0, y0);
      ctx.lineTo(x1, y1);
      ctx.stroke();
      ctx.setLineDash([]);
      ctx.lineWidth = 1;
    }
  }
}

function drawIndicator(ctx: CanvasRenderingContext2D, vm: ViewModel, W: number): void {
  if (vm.indicator === null || vm.scene?.condition !== "teleaware") {
    return;
  }
  const placement = placeIndicator(vm.indicator, W);
  ctx.fillStyle = placement.movement === "moving" ? "#ffd166" : "#8ecae6";
  if (placement.kind === "icon") {
    ctx.beginPath();
    ctx.moveTo(placement.x, placement.y);
    ctx.lineTo(placement.x - 10, placement.y - 16);
    ctx.lineTo(placement.x + 10, placement.y - 16);
    ctx.closePath();
    ctx.fill();
    ctx.font = "14px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(placement.label, placement.x, placement.y - 22);
    ctx.textAlign = "left";
  } else {
    const cx = placement.edge === "left" ? 26 : W - 26;
    const cy = ctx.canvas.height / 2;
    ctx.save();
    ctx.translate(cx, cy);
    ctx.rotate(-placement.bearing); // screen y is down: CCW bearings rotate up
    ctx.beginPath();
    ctx.moveTo(18, 0);
    ctx.lineTo(-10, -10);
    ctx.lineTo(-10, 10);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
    ctx.font = "14px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(placement.label, cx, cy + 26);
    ctx.textAlign = "left";
  }
}

function drawHud(ctx: CanvasRenderingContext2D, vm: ViewModel, hud: HudInfo, W: number, H: number): void {
  ctx.fillStyle = "rgba(0,0,0,0.55)";
  ctx.fillRect(0, H - 26, W, 26);
  ctx.fillStyle = "#e8e8e8";
  ctx.font = "13px monospace";
  const latency = hud.latencyMs === null ? "--" : `${hud.latencyMs.toFixed(0)} ms`;
  const movement = vm.indicator?.movement ?? "n/a";
  ctx.fillText(
    `t=${(vm.simTimeMs / 1000).toFixed(1)}s  echo=${latency}  keys=[${hud.keys}]  partner=${movement}  ${vm.scene?.condition ?? ""}`,
    10,
    H - 8,
  );
}
