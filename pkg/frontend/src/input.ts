// Virtual stylus: a 2D drag pad mapping to pitch/yaw within +-60 degrees,
// plus hold-to-activate buttons for the feeder (b1) and pivot (b2).

export interface StylusState {
  pitch: number;
  yaw: number;
  b1: boolean;
  b2: boolean;
}

export const MAX_ANGLE = Math.PI / 3;

/** Maps a pad position (px, py in [-1, 1], y up) to pitch/yaw radians. */
export function padToAngles(px: number, py: number): { pitch: number; yaw: number } {
  const clamp = (v: number) => Math.max(-1, Math.min(1, v));
  // pad up = pitch forward-down (x-rotation), pad right = yaw
  return { pitch: clamp(py) * MAX_ANGLE, yaw: clamp(px) * MAX_ANGLE };
}

export function anglesToPad(pitch: number, yaw: number): { px: number; py: number } {
  return { px: yaw / MAX_ANGLE, py: pitch / MAX_ANGLE };
}

export class StylusPad {
  readonly state: StylusState = { pitch: 0, yaw: 0, b1: false, b2: false };
  private pointerId: number | null = null;

  constructor(
    private pad: HTMLElement,
    private knob: HTMLElement,
    b1Button: HTMLElement,
    b2Button: HTMLElement,
  ) {
    pad.addEventListener("pointerdown", (e) => this.grab(e));
    pad.addEventListener("pointermove", (e) => this.drag(e));
    pad.addEventListener("pointerup", (e) => this.release(e));
    pad.addEventListener("pointercancel", (e) => this.release(e));
    for (const [el, key] of [
      [b1Button, "b1"],
      [b2Button, "b2"],
    ] as const) {
      el.addEventListener("pointerdown", (e) => {
        (e.target as HTMLElement).setPointerCapture((e as PointerEvent).pointerId);
        this.state[key] = true;
        el.classList.add("held");
      });
      const off = () => {
        this.state[key] = false;
        el.classList.remove("held");
      };
      el.addEventListener("pointerup", off);
      el.addEventListener("pointercancel", off);
    }
    this.positionKnob();
  }

  private grab(e: PointerEvent): void {
    this.pointerId = e.pointerId;
    this.pad.setPointerCapture(e.pointerId);
    this.drag(e);
  }

  private drag(e: PointerEvent): void {
    if (this.pointerId !== e.pointerId) return;
    const rect = this.pad.getBoundingClientRect();
    const px = ((e.clientX - rect.left) / rect.width) * 2 - 1;
    const py = -(((e.clientY - rect.top) / rect.height) * 2 - 1);
    const { pitch, yaw } = padToAngles(px, py);
    this.state.pitch = pitch;
    this.state.yaw = yaw;
    this.positionKnob();
  }

  private release(e: PointerEvent): void {
    if (this.pointerId !== e.pointerId) return;
    this.pointerId = null;
    // the stylus keeps its orientation when released (matches a desk stylus
    // resting in its holder); double-click the pad to re-center
  }

  recenter(): void {
    this.state.pitch = 0;
    this.state.yaw = 0;
    this.positionKnob();
  }

  private positionKnob(): void {
    const { px, py } = anglesToPad(this.state.pitch, this.state.yaw);
    this.knob.style.left = `${50 + px * 45}%`;
    this.knob.style.top = `${50 - py * 45}%`;
  }
}
