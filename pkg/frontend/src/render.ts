// Canvas drawing.  Only a narrow slice of CanvasRenderingContext2D is used
// so tests can pass a recording fake.

import type { ViewState } from "./state.js";
import { zoneFillColors } from "./state.js";
import type { Viewport } from "./transform.js";
import { worldToScreen } from "./transform.js";

export interface Ctx2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  textAlign: CanvasTextAlign;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

const BADGE_FALLBACK: Record<string, string> = {
  very_low: "#9e9e9e",
  low: "#43a047",
  moderate: "#fdd835",
  high: "#fb8c00",
  very_high: "#e53935",
};

function tracePolygon(ctx: Ctx2D, vp: Viewport, vertices: [number, number][]): void {
  ctx.beginPath();
  vertices.forEach(([x, y], i) => {
    const [sx, sy] = worldToScreen(vp, x, y);
    if (i === 0) ctx.moveTo(sx, sy);
    else ctx.lineTo(sx, sy);
  });
  ctx.closePath();
}

export function drawScene(ctx: Ctx2D, vp: Viewport, state: ViewState): void {
  ctx.clearRect(0, 0, vp.width, vp.height);
  drawZones(ctx, vp, state);
  drawRangeRings(ctx, vp);
  drawVehicle(ctx, vp);
  drawGazeWedge(ctx, vp, state);
  drawPeds(ctx, vp, state);
}

function drawZones(ctx: Ctx2D, vp: Viewport, state: ViewState): void {
  const fills = zoneFillColors(state);
  ctx.globalAlpha = 0.55;
  for (const zone of state.zones) {
    const hex = fills.get(zone.label);
    if (!hex) continue;
    tracePolygon(ctx, vp, zone.vertices);
    ctx.fillStyle = hex;
    ctx.fill();
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 1;
    ctx.stroke();
  }
  ctx.globalAlpha = 1.0;
  ctx.fillStyle = "#333333";
  ctx.font = "11px sans-serif";
  ctx.textAlign = "center";
  for (const zone of state.zones) {
    if (!fills.has(zone.label)) continue;
    const [cx, cy] = polygonCenter(zone.vertices);
    const [sx, sy] = worldToScreen(vp, cx, cy);
    ctx.fillText(zone.label, sx, sy);
  }
}

function polygonCenter(vertices: [number, number][]): [number, number] {
  let x = 0;
  let y = 0;
  for (const [vx, vy] of vertices) {
    x += vx;
    y += vy;
  }
  return [x / vertices.length, y / vertices.length];
}

function drawRangeRings(ctx: Ctx2D, vp: Viewport): void {
  const [ox, oy] = worldToScreen(vp, 0, 0);
  ctx.strokeStyle = "#666666";
  ctx.globalAlpha = 0.4;
  ctx.lineWidth = 1;
  for (let r = 1; r <= 4; r++) {
    ctx.beginPath();
    ctx.arc(ox, oy, r * vp.scale, 0, Math.PI * 2);
    ctx.stroke();
  }
  ctx.globalAlpha = 1.0;
}

function drawVehicle(ctx: Ctx2D, vp: Viewport): void {
  // body extends forward (up-screen) from the bumper line
  const [left, bumperY] = worldToScreen(vp, 0, 0.875);
  const [right] = worldToScreen(vp, 0, -0.875);
  const length = 3.8 * vp.scale;
  ctx.beginPath();
  ctx.rect(left, bumperY - length, right - left, length);
  ctx.fillStyle = "#37474f";
  ctx.fill();
}

/** Grey overlay marking the column the watched mirror can see. */
function drawGazeWedge(ctx: Ctx2D, vp: Viewport, state: ViewState): void {
  if (state.gaze === "unknown") return;
  const column = state.gaze === "left" ? "L" : state.gaze === "right" ? "R" : "C";
  ctx.globalAlpha = 0.35;
  ctx.fillStyle = "#78909c";
  for (const zone of state.zones) {
    if (!zone.label.startsWith(column) || zone.label === "AL" || zone.label === "AR") {
      continue;
    }
    tracePolygon(ctx, vp, zone.vertices);
    ctx.fill();
  }
  ctx.globalAlpha = 1.0;
}

function drawPeds(ctx: Ctx2D, vp: Viewport, state: ViewState): void {
  for (const ped of state.peds) {
    const [sx, sy] = worldToScreen(vp, ped.x, ped.y);
    ctx.beginPath();
    ctx.arc(sx, sy, 7, 0, Math.PI * 2);
    ctx.fillStyle = "#1565c0";
    ctx.fill();
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 2;
    ctx.stroke();
    if (ped.badge !== null) {
      ctx.beginPath();
      ctx.rect(sx - 9, sy - 24, 18, 12);
      ctx.fillStyle = ped.badgeHex ?? BADGE_FALLBACK[ped.badge];
      ctx.fill();
    }
    ctx.fillStyle = "#111111";
    ctx.font = "10px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(ped.badge ? `${ped.id} ${ped.badge}` : ped.id, sx, sy + 20);
  }
}
