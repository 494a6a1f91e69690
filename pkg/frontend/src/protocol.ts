// Wire protocol of the session service: JSON text frames over WebSocket.

export interface SessionMessage {
  type: "input";
  pitch: number;
  yaw: number;
  b1: boolean;
  b2: boolean;
  seq: number;
}

export interface StateMetrics {
  frechet_over_h: number;
  ee_pos_err_over_h: number;
  pointing_err_rad: number;
}

export type Vec3 = [number, number, number];

export interface StateMessage {
  type: "state";
  tick: number;
  q: number[];
  link_positions: Vec3[];
  target_path: Vec3[];
  mode: "idle" | "ftl" | "pivot";
  metrics: StateMetrics;
  kappa: number[];
}

export interface ErrorMessage {
  type: "error";
  error: string;
}

function isVec3Array(v: unknown): v is Vec3[] {
  return (
    Array.isArray(v) &&
    v.every(
      (p) => Array.isArray(p) && p.length === 3 && p.every((x) => Number.isFinite(x)),
    )
  );
}

export function parseStateMessage(text: string): StateMessage | ErrorMessage | null {
  let msg: unknown;
  try {
    msg = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  const m = msg as Record<string, unknown>;
  if (m.type === "error" && typeof m.error === "string") {
    return { type: "error", error: m.error };
  }
  if (m.type !== "state") return null;
  if (
    typeof m.tick !== "number" ||
    !Array.isArray(m.q) ||
    !m.q.every((x) => Number.isFinite(x)) ||
    !isVec3Array(m.link_positions) ||
    !isVec3Array(m.target_path) ||
    (m.mode !== "idle" && m.mode !== "ftl" && m.mode !== "pivot") ||
    typeof m.metrics !== "object" ||
    m.metrics === null ||
    !Array.isArray(m.kappa)
  ) {
    return null;
  }
  const metrics = m.metrics as Record<string, unknown>;
  for (const key of ["frechet_over_h", "ee_pos_err_over_h", "pointing_err_rad"]) {
    if (!Number.isFinite(metrics[key])) return null;
  }
  return msg as StateMessage;
}

export function encodeInput(msg: SessionMessage): string {
  return JSON.stringify(msg);
}

/** Monotone sequence numbers for input frames; the server drops stale ones. */
export class SeqCounter {
  private seq = 0;
  next(): number {
    this.seq += 1;
    return this.seq;
  }
  get current(): number {
    return this.seq;
  }
}
