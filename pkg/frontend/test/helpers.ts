// Shared fakes: a miniature parkrisk server behind fetch, and a scripted
// WebSocket.

import type { FrameMessage, Gaze, RiskLevel, SceneRequest, ZonePayload } from "../src/types.js";
import type { SocketLike } from "../src/stream.js";

const HEX: Record<RiskLevel, string> = {
  very_low: "#9e9e9e",
  low: "#43a047",
  moderate: "#fdd835",
  high: "#fb8c00",
  very_high: "#e53935",
};

const COLOR: Record<RiskLevel, string> = {
  very_low: "gray",
  low: "green",
  moderate: "yellow",
  high: "orange",
  very_high: "red",
};

function zone(label: string, risk: RiskLevel, vertices: [number, number][]): ZonePayload {
  return { label, risk, color: COLOR[risk], hex: HEX[risk], vertices };
}

/** Zone colorings per gaze, shaped like the real /zones answers. */
export function cannedZones(gaze: Gaze): ZonePayload[] {
  const aware = (column: string) =>
    (gaze === "left" && column === "L") ||
    (gaze === "center" && column === "C") ||
    (gaze === "right" && column === "R");
  const byBand: Record<number, [RiskLevel, RiskLevel]> = {
    // [aware, unaware]
    1: ["high", "very_high"],
    2: ["high", "very_high"],
    3: ["moderate", "high"],
    4: ["low", "low"],
  };
  const zones: ZonePayload[] = [];
  for (const column of ["L", "C", "R"]) {
    for (let band = 1; band <= 4; band++) {
      let risk: RiskLevel =
        column === "C" && band === 1 ? "very_high" : byBand[band][aware(column) ? 0 : 1];
      const y0 = column === "L" ? 1 : column === "C" ? -1 : -3;
      zones.push(
        zone(`${column}${band}`, risk, [
          [band - 1, y0],
          [band, y0],
          [band, y0 + 2],
          [band - 1, y0 + 2],
        ]),
      );
    }
  }
  zones.push(zone("AL", "low", [[-2, 0.875], [0, 0.875], [0, 1.875], [-2, 1.875]]));
  zones.push(zone("AR", "low", [[-2, -1.875], [0, -1.875], [0, -0.875], [-2, -0.875]]));
  return zones;
}

/** The fake server's verdict for one pedestrian position under one gaze. */
export function cannedVerdict(x: number, y: number, gaze: Gaze): { zone: string; risk: RiskLevel } {
  const dist = Math.hypot(x, Math.max(0, Math.abs(y) - 0.875));
  if (x <= 0 || dist > 4) return { zone: "OUT", risk: "very_low" };
  const band = Math.max(1, Math.ceil(dist));
  if (band === 1) return { zone: "C1", risk: "very_high" };
  const aware = gaze === "center";
  const base: RiskLevel = band <= 2 ? "high" : band === 3 ? "moderate" : "low";
  const escalated: Record<RiskLevel, RiskLevel> = {
    very_low: "very_low",
    low: "low",
    moderate: "high",
    high: "very_high",
    very_high: "very_high",
  };
  return { zone: `C${band}`, risk: aware ? base : escalated[base] };
}

export interface FakeServer {
  fetch: (input: string, init?: RequestInit) => Promise<Response>;
  calls: string[];
  failNext: { value: boolean };
}

export function fakeServer(): FakeServer {
  const calls: string[] = [];
  const failNext = { value: false };
  const respond = (body: unknown, status = 200): Response =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });

  const fetchImpl = async (input: string, init?: RequestInit): Promise<Response> => {
    calls.push(input);
    if (failNext.value) {
      failNext.value = false;
      return respond({ detail: "boom" }, 500);
    }
    if (input.startsWith("/zones")) {
      const gaze = (new URLSearchParams(input.split("?")[1]).get("gaze") ?? "unknown") as Gaze;
      return respond({ gaze, zones: cannedZones(gaze) });
    }
    if (input.startsWith("/assess")) {
      const scene = JSON.parse(String(init?.body)) as SceneRequest;
      const assessments = scene.pedestrians.map((p) => {
        const verdict = cannedVerdict(p.x, p.y, scene.gaze);
        return {
          t: 1,
          ped: p.id,
          x: p.x,
          y: p.y,
          zone: verdict.zone,
          dist: Math.hypot(p.x, p.y),
          ttc: 1.0,
          risk: verdict.risk,
          color: COLOR[verdict.risk],
        };
      });
      const order: RiskLevel[] = ["very_low", "low", "moderate", "high", "very_high"];
      const top = assessments.reduce(
        (acc, a) => (order.indexOf(a.risk) > order.indexOf(acc) ? a.risk : acc),
        "very_low" as RiskLevel,
      );
      const frame: FrameMessage = {
        t: 1,
        gaze: scene.gaze,
        scene_risk: top,
        assessments,
      };
      return respond(frame);
    }
    if (input.startsWith("/config")) {
      return respond({ config: {}, colors: {} });
    }
    return respond({ detail: "not found" }, 404);
  };
  return { fetch: fetchImpl, calls, failNext };
}

export class FakeSocket implements SocketLike {
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: ((ev: unknown) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  closed = false;

  close(): void {
    this.closed = true;
  }

  push(frame: unknown): void {
    this.onmessage?.({ data: typeof frame === "string" ? frame : JSON.stringify(frame) });
  }
}
