// WebSocket stream client with reconnect; frames land in the view-state
// buffer for the scrubber.  The socket constructor is injectable for tests.

import type { FrameMessage } from "./types.js";

export interface SocketLike {
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StreamCallbacks {
  onFrame(frame: FrameMessage): void;
  onStatus(status: "connected" | "degraded" | "disconnected"): void;
}

export class StreamClient {
  private socket: SocketLike | null = null;
  private stopped = false;
  private retryMs = 500;

  constructor(
    private url: string,
    private callbacks: StreamCallbacks,
    private makeSocket: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
    private schedule: (fn: () => void, ms: number) => void = (fn, ms) => {
      setTimeout(fn, ms);
    },
  ) {}

  start(): void {
    this.stopped = false;
    this.connect();
  }

  private connect(): void {
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    this.callbacks.onStatus("connected");
    socket.onmessage = (ev) => {
      let frame: FrameMessage;
      try {
        frame = JSON.parse(ev.data) as FrameMessage;
      } catch (err) {
        console.warn("dropped malformed stream message", err);
        return;
      }
      if (typeof frame.t !== "number" || !Array.isArray(frame.assessments)) {
        console.warn("dropped stream message with missing fields");
        return;
      }
      this.retryMs = 500;
      this.callbacks.onFrame(frame);
    };
    socket.onerror = () => {
      this.callbacks.onStatus("degraded");
    };
    socket.onclose = () => {
      if (this.stopped) return;
      this.callbacks.onStatus("disconnected");
      // reconnect resumes at the live edge; history before the gap stays
      this.schedule(() => this.connect(), this.retryMs);
      this.retryMs = Math.min(this.retryMs * 2, 5000);
    };
  }

  stop(): void {
    this.stopped = true;
    this.socket?.close();
    this.callbacks.onStatus("disconnected");
  }
}
