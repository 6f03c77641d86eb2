// Workbench view state and the transitions the UI performs on it.
// Rendered levels always come from server payloads; the state layer only
// stores and rearranges them.

import { AuditLog } from "./audit.js";
import type { Assessment, FrameMessage, Gaze, RiskLevel, ZonePayload } from "./types.js";

export interface PedMarker {
  id: string;
  x: number;
  y: number;
  badge: RiskLevel | null; // null until the server has answered
  badgeHex: string | null;
  zone: string | null;
}

export interface ViewState {
  gaze: Gaze;
  zones: ZonePayload[];
  zonesGaze: Gaze | null; // gaze the current zones were fetched for
  showAZones: boolean;
  peds: PedMarker[];
  sceneRisk: RiskLevel | null;
  connection: "connected" | "degraded" | "disconnected";
  banner: string | null;
  mode: "editor" | "stream";
  liveFrames: FrameMessage[];
  scrubIndex: number | null; // null follows the live edge
}

export function initialState(): ViewState {
  return {
    gaze: "center",
    zones: [],
    zonesGaze: null,
    showAZones: true,
    peds: [
      { id: "p0", x: 2.9, y: 0.0, badge: null, badgeHex: null, zone: null },
    ],
    sceneRisk: null,
    connection: "disconnected",
    banner: null,
    mode: "editor",
    liveFrames: [],
    scrubIndex: null,
  };
}

export function applyZones(state: ViewState, gaze: Gaze, zones: ZonePayload[]): void {
  state.gaze = gaze;
  state.zones = zones;
  state.zonesGaze = gaze;
  state.banner = null;
}

export function zoneFillColors(state: ViewState): Map<string, string> {
  const colors = new Map<string, string>();
  for (const zone of state.zones) {
    if (!state.showAZones && (zone.label === "AL" || zone.label === "AR")) {
      continue;
    }
    colors.set(zone.label, zone.hex);
  }
  return colors;
}

export function movePed(state: ViewState, id: string, x: number, y: number): void {
  const ped = state.peds.find((p) => p.id === id);
  if (!ped) return;
  ped.x = x;
  ped.y = y;
}

export function addPed(state: ViewState, id: string, x: number, y: number): void {
  state.peds.push({ id, x, y, badge: null, badgeHex: null, zone: null });
}

export function removePed(state: ViewState, id: string): void {
  state.peds = state.peds.filter((p) => p.id !== id);
}

/** Fold a server assessment frame back into the markers. */
export function applyAssessments(
  state: ViewState,
  frame: FrameMessage,
  audit: AuditLog,
  endpoint: string,
): void {
  const byId = new Map<string, Assessment>(frame.assessments.map((a) => [a.ped, a]));
  for (const ped of state.peds) {
    const a = byId.get(ped.id);
    if (!a) continue;
    ped.badge = a.risk;
    ped.badgeHex = null; // hex resolved from the zone payload colors at draw time
    ped.zone = a.zone;
    audit.record(ped.id, a.risk, "server", endpoint);
  }
  state.sceneRisk = frame.scene_risk;
}

/** Replace the whole marker set from a streamed frame (live mode). */
export function applyStreamFrame(
  state: ViewState,
  frame: FrameMessage,
  audit: AuditLog,
): void {
  state.peds = frame.assessments.map((a) => ({
    id: a.ped,
    x: a.x,
    y: a.y,
    badge: a.risk,
    badgeHex: null,
    zone: a.zone,
  }));
  state.sceneRisk = frame.scene_risk;
  state.gaze = frame.gaze;
  for (const a of frame.assessments) {
    audit.record(a.ped, a.risk, "server", "/stream");
  }
}

export function pushLiveFrame(state: ViewState, frame: FrameMessage, keep = 2000): void {
  state.liveFrames.push(frame);
  if (state.liveFrames.length > keep) {
    state.liveFrames.splice(0, state.liveFrames.length - keep);
  }
}

/** Frame displayed for the current scrub position (live edge when null). */
export function displayedFrame(state: ViewState): FrameMessage | null {
  if (state.liveFrames.length === 0) return null;
  if (state.scrubIndex === null) {
    return state.liveFrames[state.liveFrames.length - 1];
  }
  const i = Math.max(0, Math.min(state.scrubIndex, state.liveFrames.length - 1));
  return state.liveFrames[i];
}

/** Seek to the buffered frame nearest a timestamp; returns its index. */
export function scrubToTimestamp(state: ViewState, t: number): number {
  let best = 0;
  let bestGap = Infinity;
  state.liveFrames.forEach((frame, i) => {
    const gap = Math.abs(frame.t - t);
    if (gap < bestGap) {
      bestGap = gap;
      best = i;
    }
  });
  state.scrubIndex = best;
  return best;
}
