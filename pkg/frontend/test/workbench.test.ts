// Acceptance-level behavior: gaze colorings trace to /zones, a drag updates
// the badge from the server within the latency budget, and the audit log
// proves no risk level was computed locally.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { zoneFillColors } from "../src/state.js";
import type { Gaze } from "../src/types.js";
import { Workbench } from "../src/workbench.js";
import { FakeSocket, fakeServer } from "./helpers.js";

async function flushAsync(ms: number): Promise<void> {
  await vi.advanceTimersByTimeAsync(ms);
}

describe("gaze selection", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("renders three distinct colorings, each equal to its /zones response", async () => {
    const server = fakeServer();
    const bench = new Workbench(new ApiClient("", server.fetch));
    const colorings: string[] = [];
    for (const gaze of ["left", "center", "right"] as Gaze[]) {
      await bench.selectGaze(gaze);
      await flushAsync(100);
      // displayed colors must equal the server payload exactly
      const shown = zoneFillColors(bench.state);
      for (const zone of bench.state.zones) {
        expect(shown.get(zone.label)).toBe(zone.hex);
      }
      expect(bench.state.zonesGaze).toBe(gaze);
      colorings.push(
        JSON.stringify(bench.state.zones.map((z) => [z.label, z.risk]).sort()),
      );
    }
    expect(new Set(colorings).size).toBe(3);
  });

  it("C1 stays very high under every gaze", async () => {
    const server = fakeServer();
    const bench = new Workbench(new ApiClient("", server.fetch));
    for (const gaze of ["left", "center", "right"] as Gaze[]) {
      await bench.selectGaze(gaze);
      await flushAsync(100);
      const c1 = bench.state.zones.find((z) => z.label === "C1")!;
      expect(c1.risk).toBe("very_high");
    }
  });

  it("keeps stale zones and shows a banner when the server is down", async () => {
    const server = fakeServer();
    const bench = new Workbench(new ApiClient("", server.fetch));
    await bench.selectGaze("center");
    await flushAsync(100);
    const before = bench.state.zones;
    server.failNext.value = true;
    await bench.selectGaze("left");
    expect(bench.state.banner).toMatch(/zones unavailable/);
    expect(bench.state.zones).toBe(before);
  });
});

describe("pedestrian drag", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("updates the badge high -> very_high within 200 ms of drag end", async () => {
    const server = fakeServer();
    const bench = new Workbench(new ApiClient("", server.fetch));
    await bench.selectGaze("right");
    await flushAsync(100);
    const ped = bench.state.peds[0];
    expect(ped.x).toBe(2.9);
    expect(ped.badge).toBe("high"); // C3 while gazing right

    const dragEndAt = Date.now();
    bench.onPedestrianDrag("p0", 1.6, 0.0);
    bench.onPedestrianDrag("p0", 0.9, 0.0);
    bench.onDragEnd("p0", 0.5, 0.0);
    await flushAsync(200); // fake-clock budget after drag end
    const elapsed = Date.now() - dragEndAt;

    expect(bench.state.peds[0].badge).toBe("very_high"); // entered C1
    expect(bench.state.peds[0].zone).toBe("C1");
    expect(elapsed).toBeLessThanOrEqual(200);
  });

  it("debounces a drag gesture into few requests, latest position winning", async () => {
    const server = fakeServer();
    const bench = new Workbench(new ApiClient("", server.fetch));
    await bench.selectGaze("center");
    await flushAsync(100);
    const before = server.calls.filter((c) => c.startsWith("/assess")).length;
    for (let i = 0; i < 30; i++) {
      bench.onPedestrianDrag("p0", 2.9 - i * 0.08, 0.0);
      await flushAsync(5); // 5 ms between move events, inside the 60 ms window
    }
    bench.onDragEnd("p0", 0.5, 0.0);
    await flushAsync(300);
    const requests = server.calls.filter((c) => c.startsWith("/assess")).length - before;
    expect(requests).toBeLessThan(8);
    expect(bench.state.peds[0].badge).toBe("very_high");
  });

  it("dragging past 4 m yields very low", async () => {
    const server = fakeServer();
    const bench = new Workbench(new ApiClient("", server.fetch));
    await bench.selectGaze("center");
    await flushAsync(100);
    bench.onDragEnd("p0", 5.3, 0.0);
    await flushAsync(200);
    expect(bench.state.peds[0].badge).toBe("very_low");
    expect(bench.state.peds[0].zone).toBe("OUT");
  });
});

describe("audit invariant", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("every displayed level is server-origin; zero computed locally", async () => {
    const server = fakeServer();
    const bench = new Workbench(new ApiClient("", server.fetch));
    await bench.selectGaze("right");
    await flushAsync(100);
    bench.onDragEnd("p0", 0.5, 0.0);
    await flushAsync(200);

    const socket = new FakeSocket();
    bench.startStream("ws://test/stream", () => socket);
    socket.push({
      t: 1000,
      gaze: "left",
      scene_risk: "low",
      assessments: [
        { t: 1000, ped: "s0", x: 3.5, y: 1.9, zone: "L4", dist: 3.6, ttc: 2.6, risk: "low", color: "green" },
      ],
    });

    expect(bench.audit.entries().length).toBeGreaterThan(0);
    expect(bench.audit.locallyComputedCount()).toBe(0);
    for (const entry of bench.audit.entries()) {
      expect(entry.origin).toBe("server");
    }
  });
});

describe("stream mode", () => {
  it("renders each live frame and scrubs back by timestamp", () => {
    const server = fakeServer();
    const bench = new Workbench(new ApiClient("", server.fetch));
    const socket = new FakeSocket();
    bench.startStream("ws://test/stream", () => socket);
    for (let t = 1000; t <= 1900; t += 100) {
      socket.push({
        t,
        gaze: "center",
        scene_risk: "moderate",
        assessments: [
          { t, ped: "p0", x: 2.5, y: 0, zone: "C3", dist: 2.5, ttc: 1.8, risk: "moderate", color: "yellow" },
        ],
      });
    }
    expect(bench.state.liveFrames.length).toBe(10);
    expect(bench.state.peds[0].badge).toBe("moderate");

    bench.scrubTo(1440); // nearest buffered frame is t=1400
    const shown = bench.state.liveFrames[bench.state.scrubIndex!];
    expect(Math.abs(shown.t - 1440)).toBeLessThanOrEqual(100);

    bench.backToLive();
    expect(bench.state.scrubIndex).toBeNull();
  });

  it("drops malformed stream messages without dying", () => {
    const server = fakeServer();
    const bench = new Workbench(new ApiClient("", server.fetch));
    const socket = new FakeSocket();
    bench.startStream("ws://test/stream", () => socket);
    socket.push("{nope");
    socket.push({ hello: "world" });
    expect(bench.state.liveFrames.length).toBe(0);
  });

  it("marks the connection lost when the socket closes", () => {
    const sockets: FakeSocket[] = [];
    const server = fakeServer();
    const bench = new Workbench(new ApiClient("", server.fetch));
    bench.startStream("ws://test/stream", () => {
      const socket = new FakeSocket();
      sockets.push(socket);
      return socket;
    });
    expect(bench.state.connection).toBe("connected");
    sockets[0].onclose?.({});
    expect(bench.state.connection).toBe("disconnected");
  });
});
