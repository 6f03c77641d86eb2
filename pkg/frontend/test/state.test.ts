import { describe, expect, it } from "vitest";

import { AuditLog } from "../src/audit.js";
import {
  applyAssessments,
  applyZones,
  displayedFrame,
  initialState,
  movePed,
  pushLiveFrame,
  scrubToTimestamp,
  zoneFillColors,
} from "../src/state.js";
import type { FrameMessage } from "../src/types.js";
import { cannedZones } from "./helpers.js";

function frame(t: number): FrameMessage {
  return {
    t,
    gaze: "center",
    scene_risk: "high",
    assessments: [
      { t, ped: "p0", x: 2.9, y: 0, zone: "C3", dist: 2.9, ttc: 2.1, risk: "high", color: "orange" },
    ],
  };
}

describe("view state", () => {
  it("zone colors come straight from the payload", () => {
    const state = initialState();
    applyZones(state, "left", cannedZones("left"));
    const colors = zoneFillColors(state);
    for (const zone of state.zones) {
      expect(colors.get(zone.label)).toBe(zone.hex);
    }
  });

  it("A-zone toggle hides only AL/AR", () => {
    const state = initialState();
    applyZones(state, "left", cannedZones("left"));
    state.showAZones = false;
    const colors = zoneFillColors(state);
    expect(colors.has("AL")).toBe(false);
    expect(colors.has("AR")).toBe(false);
    expect(colors.has("C1")).toBe(true);
  });

  it("assessments update badges and the audit trail", () => {
    const state = initialState();
    const audit = new AuditLog();
    applyAssessments(state, frame(5), audit, "/assess");
    expect(state.peds[0].badge).toBe("high");
    expect(state.peds[0].zone).toBe("C3");
    expect(state.sceneRisk).toBe("high");
    expect(audit.entries()[0]).toMatchObject({
      subject: "p0",
      level: "high",
      origin: "server",
      endpoint: "/assess",
    });
  });

  it("movePed leaves unknown ids alone", () => {
    const state = initialState();
    movePed(state, "ghost", 1, 1);
    expect(state.peds[0].x).toBe(2.9);
  });

  it("scrubber finds the nearest frame; live edge follows the last", () => {
    const state = initialState();
    for (let t = 1000; t <= 2000; t += 100) pushLiveFrame(state, frame(t));
    expect(displayedFrame(state)!.t).toBe(2000);
    const index = scrubToTimestamp(state, 1230);
    expect(state.liveFrames[index].t).toBe(1200);
    expect(displayedFrame(state)!.t).toBe(1200);
    state.scrubIndex = null;
    expect(displayedFrame(state)!.t).toBe(2000);
  });

  it("live buffer is bounded", () => {
    const state = initialState();
    for (let t = 1; t <= 2100; t++) pushLiveFrame(state, frame(t), 2000);
    expect(state.liveFrames.length).toBe(2000);
    expect(state.liveFrames[0].t).toBe(101);
  });
});
