// Controller tying the API client, view state, audit log, and stream
// together.  main.ts only forwards DOM events here, which keeps all the
// behavior testable without a browser.

import { ApiClient } from "./api.js";
import { AuditLog } from "./audit.js";
import { LatestWins } from "./debounce.js";
import {
  ViewState,
  applyAssessments,
  applyStreamFrame,
  applyZones,
  displayedFrame,
  initialState,
  movePed,
  pushLiveFrame,
  scrubToTimestamp,
} from "./state.js";
import { StreamClient, SocketFactory } from "./stream.js";
import type { FrameMessage, Gaze, SceneRequest } from "./types.js";

export const DRAG_DEBOUNCE_MS = 60;

export class Workbench {
  readonly state: ViewState;
  readonly audit: AuditLog;
  onChange: (() => void) | null = null;
  private assessQueue: LatestWins<SceneRequest>;
  private stream: StreamClient | null = null;

  constructor(private api: ApiClient) {
    this.state = initialState();
    this.audit = new AuditLog();
    this.assessQueue = new LatestWins(DRAG_DEBOUNCE_MS, (scene) => this.runAssess(scene));
  }

  private notify(): void {
    this.onChange?.();
  }

  private sceneRequest(): SceneRequest {
    return {
      pedestrians: this.state.peds.map((p) => ({ id: p.id, x: p.x, y: p.y })),
      gaze: this.state.gaze,
    };
  }

  private async runAssess(scene: SceneRequest): Promise<void> {
    try {
      const frame = await this.api.assess(scene);
      applyAssessments(this.state, frame, this.audit, "/assess");
      this.state.banner = null;
    } catch (err) {
      this.state.banner = `assess failed: ${String(err)}`;
    }
    this.notify();
  }

  async selectGaze(gaze: Gaze): Promise<void> {
    try {
      const res = await this.api.fetchZones(gaze);
      applyZones(this.state, gaze, res.zones);
    } catch (err) {
      // keep stale zones, surface the failure
      this.state.gaze = gaze;
      this.state.banner = `zones unavailable: ${String(err)}`;
      this.notify();
      return;
    }
    this.assessQueue.push(this.sceneRequest());
    this.assessQueue.flush();
    this.notify();
  }

  onPedestrianDrag(id: string, x: number, y: number): void {
    movePed(this.state, id, x, y);
    this.assessQueue.push(this.sceneRequest());
    this.notify();
  }

  onDragEnd(id: string, x: number, y: number): void {
    movePed(this.state, id, x, y);
    this.assessQueue.push(this.sceneRequest());
    this.assessQueue.flush();
    this.notify();
  }

  toggleAZones(): void {
    this.state.showAZones = !this.state.showAZones;
    this.notify();
  }

  startStream(url: string, makeSocket?: SocketFactory): void {
    this.state.mode = "stream";
    this.stream = new StreamClient(
      url,
      {
        onFrame: (frame) => this.onStreamFrame(frame),
        onStatus: (status) => {
          this.state.connection = status;
          this.notify();
        },
      },
      makeSocket,
    );
    this.stream.start();
  }

  stopStream(): void {
    this.stream?.stop();
    this.stream = null;
    this.state.mode = "editor";
    this.notify();
  }

  onStreamFrame(frame: FrameMessage): void {
    pushLiveFrame(this.state, frame);
    if (this.state.scrubIndex === null) {
      applyStreamFrame(this.state, frame, this.audit);
    }
    this.notify();
  }

  scrubTo(t: number): void {
    scrubToTimestamp(this.state, t);
    const frame = displayedFrame(this.state);
    if (frame) {
      applyStreamFrame(this.state, frame, this.audit);
    }
    this.notify();
  }

  backToLive(): void {
    this.state.scrubIndex = null;
    const frame = displayedFrame(this.state);
    if (frame) {
      applyStreamFrame(this.state, frame, this.audit);
    }
    this.notify();
  }
}
