"""HTTP/WebSocket service for zone polygons, what-if scoring, and live frames.

The service owns no risk logic: zone colors come straight from the risk
matrix and what-if scoring reuses the same geometry and risk primitives as
the replay pipeline.  Stream fan-out is single-producer multi-consumer;
slow consumers can opt into latest-wins coalescing.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, Field

from .config import AppConfig, config_to_dict, default_config
from .geometry import GroundPoint, distance_to_bumper, locate, zone_polygons
from .pipeline import FramePrediction, RiskAssessment, run_replay
from .risk import LEVEL_COLORS, GazeTarget, RiskLevel, assess, risk_matrix


class StreamHub:
    """Fan-out of frame messages to any number of subscribers."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._subscribers: list[_Subscription] = []
        self._closed = False

    def subscribe(self, coalesce: bool = True) -> "_Subscription":
        sub = _Subscription(self, coalesce)
        with self._lock:
            self._subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: "_Subscription") -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)

    def publish(self, message: dict) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
        for sub in subscribers:
            sub._offer(message)

    def close(self) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
            self._closed = True
        for sub in subscribers:
            sub._offer(None)


class _Subscription:
    """One consumer's view of the hub.

    Without coalescing every message is buffered in order; with coalescing
    only the latest undelivered message is kept.
    """

    def __init__(self, hub: StreamHub, coalesce: bool):
        self._hub = hub
        self._coalesce = coalesce
        self._cond = threading.Condition()
        self._queue: list[dict | None] = []

    def _offer(self, message: dict | None) -> None:
        with self._cond:
            if self._coalesce and message is not None:
                self._queue = [m for m in self._queue if m is None]
            self._queue.append(message)
            self._cond.notify()

    def get(self, timeout: float | None = None) -> dict | None:
        """Next message, or None on timeout/hub close."""
        with self._cond:
            if not self._queue:
                self._cond.wait(timeout)
            if not self._queue:
                return None
            return self._queue.pop(0)

    def close(self) -> None:
        self._hub.unsubscribe(self)


class ScenePedestrian(BaseModel):
    id: str
    x: float
    y: float


class SceneState(BaseModel):
    pedestrians: list[ScenePedestrian] = Field(default_factory=list)
    gaze: GazeTarget = GazeTarget.UNKNOWN
    reversing: bool = False


def assess_scene(scene: SceneState, cfg: AppConfig, now: int = 0) -> FramePrediction:
    """Stateless what-if scoring of assessment-frame pedestrian positions."""
    ids = [p.id for p in scene.pedestrians]
    if len(set(ids)) != len(ids):
        raise ValueError("pedestrian ids must be unique")
    assessments = []
    for ped in scene.pedestrians:
        point = GroundPoint(ped.x, ped.y)
        zone = locate(point, cfg.layout)
        dist = distance_to_bumper(point, cfg.layout)
        assessments.append(
            RiskAssessment(
                timestamp=now,
                pedestrian=ped.id,
                x=ped.x,
                y=ped.y,
                zone=zone,
                distance=dist,
                ttc=dist / cfg.params.reverse_speed,
                gaze_used=scene.gaze,
                risk=assess(zone, scene.gaze, cfg.params),
            )
        )
    scene_risk = max((a.risk for a in assessments), default=RiskLevel.VERY_LOW)
    return FramePrediction(now, scene.gaze, tuple(assessments), scene_risk)


def zones_payload(cfg: AppConfig, gaze: GazeTarget, resolution: int = 16) -> list[dict]:
    """Zone polygons joined with the risk matrix for one gaze state."""
    matrix = risk_matrix(cfg.params, cfg.layout)
    levels = matrix.for_gaze(gaze, cfg.params)
    payload = []
    for zone, vertices in zone_polygons(cfg.layout, resolution):
        level = levels[zone.label]
        color, hex_code = LEVEL_COLORS[level]
        payload.append(
            {
                "label": zone.label,
                "risk": level.wire,
                "color": color,
                "hex": hex_code,
                "vertices": [[x, y] for x, y in vertices],
            }
        )
    return payload


def _assessment_dict(a: RiskAssessment) -> dict:
    return {
        "t": a.timestamp,
        "ped": a.pedestrian,
        "x": a.x,
        "y": a.y,
        "zone": a.zone.label,
        "dist": a.distance,
        "ttc": a.ttc,
        "risk": a.risk.wire,
        "color": LEVEL_COLORS[a.risk][0],
    }


def frame_message(frame: FramePrediction) -> dict:
    return {
        "t": frame.timestamp,
        "gaze": frame.gaze_used.value,
        "scene_risk": frame.scene_risk.wire,
        "assessments": [_assessment_dict(a) for a in frame.assessments],
    }


def create_app(
    cfg: AppConfig | None = None,
    hub: StreamHub | None = None,
    ui_dir: str | None = None,
) -> FastAPI:
    cfg = cfg or default_config()
    hub = hub or StreamHub()
    app = FastAPI(title="parkrisk")
    app.state.cfg = cfg
    app.state.hub = hub

    @app.get("/config")
    def get_config() -> dict:
        return {
            "config": config_to_dict(cfg),
            "colors": {level.wire: list(LEVEL_COLORS[level]) for level in RiskLevel},
        }

    @app.get("/zones")
    def get_zones(gaze: GazeTarget = GazeTarget.UNKNOWN, resolution: int = 16) -> dict:
        if resolution < 1 or resolution > 256:
            raise HTTPException(status_code=422, detail="resolution must be 1..256")
        return {"gaze": gaze.value, "zones": zones_payload(cfg, gaze, resolution)}

    @app.post("/assess")
    def post_assess(scene: SceneState) -> dict:
        # what-if scoring is stateless; a fixed timestamp keeps equal scenes
        # byte-identical in the response
        try:
            frame = assess_scene(scene, cfg, now=0)
        except ValueError as e:
            raise HTTPException(status_code=422, detail=str(e)) from None
        return frame_message(frame)

    @app.websocket("/stream")
    async def stream(websocket: WebSocket, coalesce: bool = True) -> None:
        from starlette.concurrency import run_in_threadpool

        await websocket.accept()
        sub = hub.subscribe(coalesce=coalesce)
        try:
            while True:
                message = await run_in_threadpool(sub.get, 0.2)
                if message is not None:
                    await websocket.send_text(json.dumps(message, separators=(",", ":")))
        except WebSocketDisconnect:
            pass
        finally:
            sub.close()

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


@dataclass
class ReplayPublisher:
    """Background thread pushing a replayed dataset's frames into a hub."""

    hub: StreamHub
    cfg: AppConfig
    dataset_dir: str
    speed_factor: float | None = None
    loop: bool = False

    def start(self) -> threading.Thread:
        thread = threading.Thread(target=self._run, daemon=True)
        thread.start()
        return thread

    def _run(self) -> None:
        while True:
            result = run_replay(self.dataset_dir, self.cfg)
            previous_t = None
            for frame in result.frames:
                if self.speed_factor is not None and previous_t is not None:
                    gap = (frame.timestamp - previous_t) / 1000.0 / self.speed_factor
                    if gap > 0:
                        time.sleep(gap)
                self.hub.publish(frame_message(frame))
                previous_t = frame.timestamp
            if not self.loop:
                break


def run_server(
    cfg: AppConfig,
    host: str = "127.0.0.1",
    port: int = 8000,
    replay_dir: str | None = None,
    replay_speed: float | None = 1.0,
    ui_dir: str | None = None,
) -> None:
    import uvicorn

    hub = StreamHub()
    app = create_app(cfg, hub, ui_dir=ui_dir)
    if replay_dir is not None:
        ReplayPublisher(hub, cfg, replay_dir, speed_factor=replay_speed, loop=True).start()
    uvicorn.run(app, host=host, port=port, log_level="warning")
