// WebSocket session client: reconnects with backoff, keeps only the most
// recent state (a mailbox consumed once per render frame), and sends input
// frames with strictly increasing sequence numbers.

import {
  encodeInput,
  parseStateMessage,
  SeqCounter,
  type SessionMessage,
  type StateMessage,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface SessionEvents {
  onStatus?: (status: ConnectionStatus, detail?: string) => void;
  onError?: (message: string) => void;
}

export function backoffDelayMs(attempt: number, baseMs = 250, maxMs = 5000): number {
  return Math.min(maxMs, baseMs * 2 ** Math.min(attempt, 10));
}

export class SessionClient {
  private ws: WebSocket | null = null;
  private latest: StateMessage | null = null;
  private seq = new SeqCounter();
  private attempt = 0;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private url: string,
    private events: SessionEvents = {},
    private wsFactory: (url: string) => WebSocket = (u) => new WebSocket(u),
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    this.events.onStatus?.("connecting");
    const ws = this.wsFactory(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.attempt = 0;
      this.events.onStatus?.("open");
    };
    ws.onmessage = (ev: MessageEvent) => {
      const msg = parseStateMessage(String(ev.data));
      if (msg === null) return;
      if (msg.type === "error") {
        this.events.onError?.(msg.error);
        return;
      }
      // latest wins; rendering never reorders ticks
      if (this.latest === null || msg.tick >= this.latest.tick) {
        this.latest = msg;
      }
    };
    ws.onclose = () => {
      this.ws = null;
      if (this.closed) return;
      this.events.onStatus?.("closed", "retrying");
      const delay = backoffDelayMs(this.attempt++);
      this.timer = setTimeout(() => this.open(), delay);
    };
    ws.onerror = () => {
      // close handler drives the retry
    };
  }

  /** Most recent state, or null before the first frame arrives. */
  takeState(): StateMessage | null {
    return this.latest;
  }

  sendInput(pitch: number, yaw: number, b1: boolean, b2: boolean): SessionMessage | null {
    if (!this.ws || this.ws.readyState !== 1) return null;
    const msg: SessionMessage = { type: "input", pitch, yaw, b1, b2, seq: this.seq.next() };
    this.ws.send(encodeInput(msg));
    return msg;
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.ws?.close();
    this.ws = null;
  }
}
