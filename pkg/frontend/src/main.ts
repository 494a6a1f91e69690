// Wires the session client, stylus pad and renderer together.

import { defaultCamera, orbit, zoom, type Camera } from "./camera.js";
import { StylusPad } from "./input.js";
import type { StateMessage, Vec3 } from "./protocol.js";
import { formatMetrics, renderScene } from "./render.js";
import { SessionClient, type ConnectionStatus } from "./session.js";

const INPUT_RATE_HZ = 30;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const canvas = el<HTMLCanvasElement>("scene");
  const banner = el<HTMLDivElement>("banner");
  const badge = el<HTMLDivElement>("mode-badge");
  const metricsBox = el<HTMLDivElement>("metrics");
  const pad = el<HTMLDivElement>("pad");
  const knob = el<HTMLDivElement>("knob");
  const b1 = el<HTMLButtonElement>("b1");
  const b2 = el<HTMLButtonElement>("b2");

  let cam: Camera = defaultCamera();
  const stylus = new StylusPad(pad, knob, b1, b2);
  pad.addEventListener("dblclick", () => stylus.recenter());

  const url =
    new URLSearchParams(location.search).get("ws") ??
    `ws://${location.hostname || "127.0.0.1"}:8700/session`;

  const client = new SessionClient(url, {
    onStatus: (status: ConnectionStatus, detail?: string) => {
      banner.textContent = status === "open" ? "" : `connection ${status} ${detail ?? ""}`;
      banner.style.display = status === "open" ? "none" : "block";
    },
    onError: (message) => {
      banner.textContent = `server error: ${message}`;
      banner.style.display = "block";
    },
  });
  client.connect();

  // camera controls on the canvas (drag orbits, wheel zooms)
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener("pointerdown", (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
    canvas.setPointerCapture(e.pointerId);
  });
  canvas.addEventListener("pointermove", (e) => {
    if (!dragging) return;
    cam = orbit(cam, -(e.clientX - lastX) * 0.01, (e.clientY - lastY) * 0.01);
    lastX = e.clientX;
    lastY = e.clientY;
  });
  canvas.addEventListener("pointerup", () => (dragging = false));
  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    cam = zoom(cam, e.deltaY > 0 ? 1.1 : 0.9);
  });

  // input stream: send while any widget is active (or buttons held)
  setInterval(() => {
    const s = stylus.state;
    client.sendInput(s.pitch, s.yaw, s.b1, s.b2);
  }, 1000 / INPUT_RATE_HZ);

  let frozenEE: Vec3 | null = null;
  let lastMode: StateMessage["mode"] = "idle";

  function frame(): void {
    const state = client.takeState();
    if (state) {
      if (state.mode === "pivot" && lastMode !== "pivot") {
        const tip = state.link_positions[state.link_positions.length - 1];
        frozenEE = tip ? [...tip] : null;
      } else if (state.mode !== "pivot") {
        frozenEE = null;
      }
      lastMode = state.mode;
      badge.textContent = state.mode.toUpperCase();
      badge.className = `badge ${state.mode}`;
      metricsBox.textContent = formatMetrics(state);
      renderScene(canvas, cam, state, { frozenEE });
    }
    requestAnimationFrame(frame);
  }
  requestAnimationFrame(frame);
}

main();
