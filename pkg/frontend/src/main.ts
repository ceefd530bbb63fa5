// Console bootstrap: canvas, keyboard/mouse/slider wiring, render loop.
// URL query params: host, port, role (informational).

import { InputEncoder } from "./input.js";
import { Connection, clickEcho, driveEcho } from "./net.js";
import { SequenceAllocator } from "./protocol.js";
import { renderFrame } from "./render.js";
import { ViewModel } from "./state.js";

function wsUrl(): string {
  const params = new URLSearchParams(window.location.search);
  const host = params.get("host") ?? window.location.hostname ?? "127.0.0.1";
  const port = params.get("port") ?? window.location.port ?? "8000";
  return `ws://${host}:${port}/ws?role=${params.get("role") ?? "operator"}`;
}

function main(): void {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    throw new Error("canvas 2d context unavailable");
  }
  const vm = new ViewModel();
  const input = new InputEncoder(new SequenceAllocator(), () => performance.now());
  const conn = new Connection({ url: wsUrl(), vm });
  conn.open();

  window.addEventListener("keydown", (ev) => {
    const env = input.setKey(ev.key, true);
    if (env) {
      conn.send(env, driveEcho(vm.robot));
    }
  });
  window.addEventListener("keyup", (ev) => {
    const env = input.setKey(ev.key, false);
    if (env) {
      conn.send(env, driveEcho(vm.robot));
    }
  });

  canvas.addEventListener("click", (ev) => {
    const rect = canvas.getBoundingClientRect();
    const u = ((ev.clientX - rect.left) / rect.width) * canvas.width;
    conn.send(input.click(u), clickEcho());
  });

  const panSlider = document.getElementById("pan") as HTMLInputElement;
  const tiltSlider = document.getElementById("tilt") as HTMLInputElement;
  const onSlider = () => {
    const pan = (Number(panSlider.value) * Math.PI) / 180;
    const tilt = (Number(tiltSlider.value) * Math.PI) / 180;
    const env = input.setPanTilt(pan, tilt);
    if (env) {
      conn.send(env);
    }
  };
  panSlider.addEventListener("input", onSlider);
  tiltSlider.addEventListener("input", onSlider);

  const draw = () => {
    const keys = Object.entries(input.snapshotKeys())
      .filter(([, down]) => down)
      .map(([k]) => k.toUpperCase())
      .join("");
    renderFrame(ctx, vm, { latencyMs: conn.latencyMs, keys });
    requestAnimationFrame(draw);
  };
  requestAnimationFrame(draw);
}

main();
