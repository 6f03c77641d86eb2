// DOM wiring for the workbench page.

import { ApiClient } from "./api.js";
import { drawScene } from "./render.js";
import { displayedFrame } from "./state.js";
import { fitViewport, screenToWorld, worldToScreen } from "./transform.js";
import type { Gaze } from "./types.js";
import { Workbench } from "./workbench.js";

const api = new ApiClient("");
const bench = new Workbench(api);

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
let viewport = fitViewport(canvas.width, canvas.height);

const banner = document.getElementById("banner")!;
const sceneRiskEl = document.getElementById("scene-risk")!;
const auditEl = document.getElementById("audit")!;
const scrub = document.getElementById("scrub") as HTMLInputElement;
const scrubLabel = document.getElementById("scrub-label")!;

function redraw(): void {
  drawScene(ctx, viewport, bench.state);
  banner.textContent = bench.state.banner ?? "";
  banner.className = bench.state.banner ? "banner visible" : "banner";
  sceneRiskEl.textContent = bench.state.sceneRisk ?? "-";
  sceneRiskEl.dataset.level = bench.state.sceneRisk ?? "";
  auditEl.textContent = `${bench.audit.entries().length} server levels / ${bench.audit.locallyComputedCount()} local`;
  const frames = bench.state.liveFrames;
  if (frames.length > 1) {
    scrub.max = String(frames.length - 1);
    if (bench.state.scrubIndex === null) {
      scrub.value = scrub.max;
    }
    const shown = displayedFrame(bench.state);
    scrubLabel.textContent = shown ? `t=${shown.t} ms` : "";
  }
}

bench.onChange = redraw;

// --- gaze selector
for (const gaze of ["left", "center", "right", "unknown"] as Gaze[]) {
  const button = document.getElementById(`gaze-${gaze}`)!;
  button.addEventListener("click", () => {
    for (const other of document.querySelectorAll(".gaze-btn")) {
      other.classList.toggle("active", other === button);
    }
    void bench.selectGaze(gaze);
  });
}

(document.getElementById("toggle-azones") as HTMLInputElement).addEventListener(
  "change",
  () => bench.toggleAZones(),
);

// --- pedestrian dragging
let dragging: string | null = null;

function pickPed(sx: number, sy: number): string | null {
  for (const ped of bench.state.peds) {
    const [px, py] = worldToScreen(viewport, ped.x, ped.y);
    if (Math.hypot(px - sx, py - sy) < 14) {
      return ped.id;
    }
  }
  return null;
}

function canvasPoint(ev: PointerEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  return [ev.clientX - rect.left, ev.clientY - rect.top];
}

canvas.addEventListener("pointerdown", (ev) => {
  const [sx, sy] = canvasPoint(ev);
  dragging = pickPed(sx, sy);
  if (dragging) {
    canvas.setPointerCapture(ev.pointerId);
  }
});

canvas.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  const [sx, sy] = canvasPoint(ev);
  const [x, y] = screenToWorld(viewport, sx, sy);
  bench.onPedestrianDrag(dragging, x, y);
});

canvas.addEventListener("pointerup", (ev) => {
  if (!dragging) return;
  const [sx, sy] = canvasPoint(ev);
  const [x, y] = screenToWorld(viewport, sx, sy);
  bench.onDragEnd(dragging, x, y);
  dragging = null;
});

// --- live stream + scrubber
document.getElementById("stream-toggle")!.addEventListener("click", () => {
  if (bench.state.mode === "stream") {
    bench.stopStream();
  } else {
    bench.startStream(api.streamUrl(true));
  }
});

scrub.addEventListener("input", () => {
  const frames = bench.state.liveFrames;
  if (frames.length === 0) return;
  const index = Number(scrub.value);
  if (index >= frames.length - 1) {
    bench.backToLive();
  } else {
    bench.scrubTo(frames[index].t);
  }
});

// --- boot
async function boot(): Promise<void> {
  await bench.selectGaze("center");
  redraw();
}

void boot();

// dev-mode hook for the audit invariant
(window as unknown as { __audit?: unknown }).__audit = bench.audit;
