// Assessment frame <-> canvas mapping.  The vehicle sits at the top of the
// canvas facing up: assessment x (rearward) grows downward on screen,
// assessment y (vehicle's left) grows to the left.

import type { Gaze } from "./types.js";

export interface Viewport {
  width: number;
  height: number;
  scale: number; // pixels per meter
  originX: number; // screen x of the bumper center
  originY: number; // screen y of the bumper center
}

export function fitViewport(width: number, height: number, maxX = 6.5, maxY = 5.5): Viewport {
  const scale = Math.min(width / (2 * maxY), height / (maxX + 3));
  return {
    width,
    height,
    scale,
    originX: width / 2,
    originY: 2.5 * scale,
  };
}

export function worldToScreen(vp: Viewport, x: number, y: number): [number, number] {
  return [vp.originX - y * vp.scale, vp.originY + x * vp.scale];
}

export function screenToWorld(vp: Viewport, sx: number, sy: number): [number, number] {
  return [(sy - vp.originY) / vp.scale, (vp.originX - sx) / vp.scale];
}

export function mirrorGaze(gaze: Gaze): Gaze {
  if (gaze === "left") return "right";
  if (gaze === "right") return "left";
  return gaze;
}

export function mirrorZoneLabel(label: string): string {
  if (label === "AL") return "AR";
  if (label === "AR") return "AL";
  if (label.startsWith("L")) return "R" + label.slice(1);
  if (label.startsWith("R")) return "L" + label.slice(1);
  return label;
}
