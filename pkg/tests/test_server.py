import json
import threading

import pytest
from fastapi.testclient import TestClient

from parkrisk.config import default_config
from parkrisk.geometry import GroundPoint, assessment_to_sensor
from parkrisk.ldm import LdmLayer, LdmRecord, LocalDynamicMap
from parkrisk.percepts import ExteriorDetection, GazeEvent
from parkrisk.pipeline import tick
from parkrisk.risk import GazeTarget
from parkrisk.server import (
    SceneState,
    ScenePedestrian,
    StreamHub,
    assess_scene,
    create_app,
    frame_message,
)

CFG = default_config()


@pytest.fixture()
def client():
    hub = StreamHub()
    app = create_app(CFG, hub)
    with TestClient(app) as c:
        c.hub = hub
        yield c


class TestConfigEndpoint:
    def test_roundtrippable_config(self, client):
        body = client.get("/config").json()
        assert body["config"]["risk"]["reaction_time_s"] == 1.5
        assert body["colors"]["very_high"][0] == "red"


class TestZonesEndpoint:
    def test_c1_always_red(self, client):
        for gaze in ("left", "center", "right"):
            zones = client.get(f"/zones?gaze={gaze}").json()["zones"]
            c1 = next(z for z in zones if z["label"] == "C1")
            assert c1["risk"] == "very_high"
            assert c1["color"] == "red"

    def test_three_distinct_colorings(self, client):
        colorings = set()
        for gaze in ("left", "center", "right"):
            zones = client.get(f"/zones?gaze={gaze}").json()["zones"]
            colorings.add(tuple(sorted((z["label"], z["risk"]) for z in zones)))
        assert len(colorings) == 3

    def test_center_gaze_escalates_sides(self, client):
        zones = client.get("/zones?gaze=center").json()["zones"]
        levels = {z["label"]: z["risk"] for z in zones}
        assert levels["C2"] == "high"  # aware keeps base
        assert levels["L2"] == "very_high"
        assert levels["R2"] == "very_high"

    def test_left_right_mirror_symmetry(self, client):
        left = {z["label"]: z["risk"] for z in client.get("/zones?gaze=left").json()["zones"]}
        right = {z["label"]: z["risk"] for z in client.get("/zones?gaze=right").json()["zones"]}
        flip = {"L": "R", "R": "L", "C": "C"}
        for label, level in left.items():
            if label in ("AL", "AR"):
                mirrored = {"AL": "AR", "AR": "AL"}[label]
            else:
                mirrored = flip[label[0]] + label[1:]
            assert right[mirrored] == level

    def test_unknown_gaze_string_rejected(self, client):
        assert client.get("/zones?gaze=windshield").status_code == 422


class TestAssessEndpoint:
    def test_fig_walkthrough(self, client):
        body = {"pedestrians": [{"id": "p0", "x": 2.9, "y": 0.0}], "gaze": "right"}
        got = client.post("/assess", json=body).json()
        assert got["scene_risk"] == "high"
        assert got["assessments"][0]["zone"] == "C3"

    def test_empty_scene(self, client):
        got = client.post("/assess", json={"pedestrians": [], "gaze": "left"}).json()
        assert got["assessments"] == []
        assert got["scene_risk"] == "very_low"

    def test_duplicate_ids_rejected(self, client):
        body = {
            "pedestrians": [{"id": "p0", "x": 1.0, "y": 0.0}, {"id": "p0", "x": 2.0, "y": 0.0}],
            "gaze": "left",
        }
        assert client.post("/assess", json=body).status_code == 422

    def test_matches_pipeline_tick(self):
        scene = SceneState(
            pedestrians=[
                ScenePedestrian(id="p0", x=2.9, y=0.0),
                ScenePedestrian(id="p1", x=0.5, y=0.2),
            ],
            gaze=GazeTarget.RIGHT,
        )
        frame = assess_scene(scene, CFG, now=1000)

        store = LocalDynamicMap()
        for ped in scene.pedestrians:
            sx, sy, sz = assessment_to_sensor(GroundPoint(ped.x, ped.y, 0.0), CFG.extrinsics)
            store.add_detection(
                "lidar0", ExteriorDetection(1000, "pedestrian", sx, sy, sz, 1.0, ped.id)
            )
        store.insert(
            LdmRecord(LdmLayer.INTERIOR, "dms0", 1000, GazeEvent(1000, GazeTarget.RIGHT, 1.0))
        )
        ticked = tick(store, 1000, CFG)
        assert ticked.scene_risk is frame.scene_risk
        by_id = {a.pedestrian: a for a in ticked.assessments}
        for a in frame.assessments:
            assert by_id[a.pedestrian].zone.label == a.zone.label
            assert by_id[a.pedestrian].risk is a.risk

    def test_referential_transparency(self, client):
        body = {"pedestrians": [{"id": "p0", "x": 1.5, "y": -0.4}], "gaze": "center"}
        first = client.post("/assess", json=body)
        second = client.post("/assess", json=body)
        assert first.content == second.content  # same scene, same bytes


def _fake_frame(t):
    return {"t": t, "gaze": "left", "scene_risk": "low", "assessments": []}


class TestStream:
    def test_ordered_messages_without_coalescing(self, client):
        with client.websocket_connect("/stream?coalesce=false") as ws:
            for t in range(1, 101):
                client.hub.publish(_fake_frame(t))
            got = [json.loads(ws.receive_text())["t"] for _ in range(100)]
        assert got == list(range(1, 101))

    def test_coalescing_keeps_final_frame(self, client):
        sub = client.hub.subscribe(coalesce=True)
        for t in range(1, 51):
            client.hub.publish(_fake_frame(t))
        last = sub.get(timeout=1)
        assert last["t"] == 50
        sub.close()

    def test_two_subscribers_identical(self, client):
        with client.websocket_connect("/stream?coalesce=false") as ws1:
            with client.websocket_connect("/stream?coalesce=false") as ws2:
                for t in range(1, 11):
                    client.hub.publish(_fake_frame(t))
                seq1 = [json.loads(ws1.receive_text())["t"] for _ in range(10)]
                seq2 = [json.loads(ws2.receive_text())["t"] for _ in range(10)]
        assert seq1 == seq2 == list(range(1, 11))

    def test_idle_subscription_activates_later(self, client):
        sub = client.hub.subscribe(coalesce=False)
        assert sub.get(timeout=0.05) is None

        def later():
            client.hub.publish(_fake_frame(7))

        timer = threading.Timer(0.05, later)
        timer.start()
        got = sub.get(timeout=2)
        assert got is not None and got["t"] == 7
        sub.close()


class TestFrameMessage:
    def test_message_shape(self):
        scene = SceneState(
            pedestrians=[ScenePedestrian(id="p0", x=2.9, y=0.0)], gaze=GazeTarget.RIGHT
        )
        message = frame_message(assess_scene(scene, CFG, now=123))
        assert message["t"] == 123
        assert message["assessments"][0]["color"] == "orange"
