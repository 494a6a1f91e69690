// Canvas renderer: backbone polyline with link spheres, target path as
// green spheres, a pointing arrow at the tip, mode badge and live metrics.

import { project, type Camera } from "./camera.js";
import type { StateMessage, Vec3 } from "./protocol.js";

export interface RenderExtras {
  frozenEE: Vec3 | null; // pivot anchor marker
}

function sphere(ctx: CanvasRenderingContext2D, x: number, y: number, r: number, fill: string) {
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fillStyle = fill;
  ctx.fill();
}

export function stateIsRenderable(state: StateMessage): boolean {
  return (
    state.link_positions.length >= 2 &&
    state.link_positions.every((p) => p.every((v) => Number.isFinite(v)))
  );
}

export function renderScene(
  canvas: HTMLCanvasElement,
  cam: Camera,
  state: StateMessage,
  extras: RenderExtras = { frozenEE: null },
): void {
  if (!stateIsRenderable(state)) {
    console.warn("skipping frame with non-finite state");
    return;
  }
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, width, height);

  const proj = (p: Vec3) => project(cam, p, width, height);

  // target path: green spheres
  for (const p of state.target_path) {
    const s = proj(p);
    if (s.visible) sphere(ctx, s.x, s.y, Math.max(1.5, 5 / (s.depth * 8 + 1)), "#3fa34d");
  }

  // backbone polyline
  const pts = state.link_positions.map(proj);
  ctx.beginPath();
  let started = false;
  for (const s of pts) {
    if (!s.visible) continue;
    if (!started) {
      ctx.moveTo(s.x, s.y);
      started = true;
    } else {
      ctx.lineTo(s.x, s.y);
    }
  }
  ctx.strokeStyle = "#7ab8ff";
  ctx.lineWidth = 2;
  ctx.stroke();

  // link spheres: locked joints dimmed
  pts.forEach((s, i) => {
    if (!s.visible) return;
    const active = i >= state.link_positions.length - activeCount(state.kappa) - 1;
    sphere(ctx, s.x, s.y, 3, active ? "#d7e7ff" : "#56606e");
  });

  // pointing arrow at the tip
  const tip = state.link_positions[state.link_positions.length - 1];
  const prev = state.link_positions[state.link_positions.length - 2];
  if (tip && prev) {
    const dir: Vec3 = arrowDirection(state);
    const end: Vec3 = [tip[0] + dir[0], tip[1] + dir[1], tip[2] + dir[2]];
    const a = proj(tip);
    const b = proj(end);
    if (a.visible && b.visible) {
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.strokeStyle = "#ffb347";
      ctx.lineWidth = 2;
      ctx.stroke();
      sphere(ctx, b.x, b.y, 2.5, "#ffb347");
    }
  }

  // pivot anchor marker
  if (extras.frozenEE) {
    const s = proj(extras.frozenEE);
    if (s.visible) {
      ctx.beginPath();
      ctx.arc(s.x, s.y, 8, 0, 2 * Math.PI);
      ctx.strokeStyle = "#ff5470";
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  }
}

function activeCount(kappa: number[]): number {
  // number of active rotational joints (feeder excluded)
  return kappa.slice(1).reduce((acc, v) => acc + (v ? 1 : 0), 0);
}

/** Tip direction estimated from the last body segment, scaled for display. */
export function arrowDirection(state: StateMessage): Vec3 {
  const n = state.link_positions.length;
  const tip = state.link_positions[n - 1]!;
  // the final vertex can duplicate the tool position; use the last distinct one
  let k = n - 2;
  while (k > 0) {
    const p = state.link_positions[k]!;
    if (Math.hypot(tip[0] - p[0], tip[1] - p[1], tip[2] - p[2]) > 1e-9) break;
    k -= 1;
  }
  const p = state.link_positions[k]!;
  const d: Vec3 = [tip[0] - p[0], tip[1] - p[1], tip[2] - p[2]];
  const nrm = Math.hypot(d[0], d[1], d[2]) || 1;
  const len = 0.03;
  return [(d[0] / nrm) * len, (d[1] / nrm) * len, (d[2] / nrm) * len];
}

export function formatMetrics(state: StateMessage): string {
  const m = state.metrics;
  return (
    `d_F/h ${m.frechet_over_h.toFixed(3)} | ` +
    `EE err/h ${m.ee_pos_err_over_h.toExponential(2)} | ` +
    `pointing ${m.pointing_err_rad.toExponential(2)} rad`
  );
}
