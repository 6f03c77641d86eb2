// Thin typed client for the parkrisk HTTP API.  The fetch implementation is
// injectable so tests can run against canned responses.

import type { ConfigResponse, FrameMessage, Gaze, SceneRequest, ZonesResponse } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(`${this.base}${path}`);
    if (!res.ok) {
      throw new Error(`GET ${path} -> HTTP ${res.status}`);
    }
    return (await res.json()) as T;
  }

  fetchConfig(): Promise<ConfigResponse> {
    return this.get<ConfigResponse>("/config");
  }

  fetchZones(gaze: Gaze): Promise<ZonesResponse> {
    return this.get<ZonesResponse>(`/zones?gaze=${gaze}`);
  }

  async assess(scene: SceneRequest): Promise<FrameMessage> {
    const res = await this.fetchImpl(`${this.base}/assess`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(scene),
    });
    if (!res.ok) {
      throw new Error(`POST /assess -> HTTP ${res.status}`);
    }
    return (await res.json()) as FrameMessage;
  }

  streamUrl(coalesce: boolean): string {
    const proto = this.base.startsWith("https") ? "wss" : "ws";
    const host = this.base ? this.base.replace(/^https?:\/\//, "") : location.host;
    return `${proto}://${host}/stream?coalesce=${coalesce}`;
  }
}
