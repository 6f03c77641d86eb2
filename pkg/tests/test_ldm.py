import random
import threading

import pytest

from parkrisk.ldm import (
    DYNAMIC_LAYERS,
    LdmError,
    LdmLayer,
    LdmRecord,
    LocalDynamicMap,
    QueryWindow,
)
from parkrisk.percepts import DetectionSet, ExteriorDetection, GazeEvent
from parkrisk.risk import GazeTarget


def gaze_record(t, source="dms0", target=GazeTarget.LEFT):
    return LdmRecord(LdmLayer.INTERIOR, source, t, GazeEvent(t, target, 0.9))


def det_record(t, source="lidar0"):
    det = ExteriorDetection(t, "pedestrian", -4.0, 0.0, -1.9, 0.9, "p0")
    return LdmRecord(LdmLayer.DYNAMIC_EXTERIOR, source, t, DetectionSet(t, (det,)))


class TestInsert:
    def test_write_then_read(self):
        store = LocalDynamicMap()
        store.insert(gaze_record(1000))
        got = store.latest(LdmLayer.INTERIOR, "dms0", QueryWindow(1000, 0))
        assert got is not None and got.timestamp == 1000

    def test_rejects_layer_payload_mismatch(self):
        with pytest.raises(LdmError):
            LdmRecord(LdmLayer.INTERIOR, "x", 1, DetectionSet(1, ()))
        with pytest.raises(LdmError):
            LdmRecord(LdmLayer.DYNAMIC_EXTERIOR, "x", 1, GazeEvent(1, GazeTarget.LEFT, 1.0))
        with pytest.raises(LdmError):
            LdmRecord(LdmLayer.INTERIOR, "x", 1, {"blob": True})

    def test_rejects_nonpositive_timestamp(self):
        with pytest.raises(LdmError):
            LdmRecord(LdmLayer.STATIC, "map", 0, {"blob": 1})

    def test_duplicate_key_overwrites(self):
        store = LocalDynamicMap()
        store.insert(gaze_record(1000, target=GazeTarget.LEFT))
        store.insert(gaze_record(1000, target=GazeTarget.RIGHT))
        got = store.latest(LdmLayer.INTERIOR, "dms0", QueryWindow(1000, 0))
        assert got.payload.target is GazeTarget.RIGHT
        assert len(store.range(LdmLayer.INTERIOR, 0, 2000)) == 1


class TestLatest:
    def test_picks_freshest_within_staleness(self):
        store = LocalDynamicMap()
        for t in (900, 1000, 1100):
            store.insert(gaze_record(t))
        got = store.latest(LdmLayer.INTERIOR, "dms0", QueryWindow(1050, 500))
        assert got.timestamp == 1000

    def test_all_too_old(self):
        store = LocalDynamicMap()
        for t in (900, 1000):
            store.insert(gaze_record(t))
        assert store.latest(LdmLayer.INTERIOR, "dms0", QueryWindow(1050, 10)) is None

    def test_empty_store(self):
        store = LocalDynamicMap()
        assert store.latest(LdmLayer.INTERIOR, "dms0", QueryWindow(1000, 100)) is None

    def test_latest_any_across_sources(self):
        store = LocalDynamicMap()
        store.insert(gaze_record(900, source="dms0"))
        store.insert(gaze_record(1000, source="dms1"))
        got = store.latest_any(LdmLayer.INTERIOR, QueryWindow(1100, 500))
        assert got.source_id == "dms1"

    def test_agrees_with_linear_scan(self):
        rng = random.Random(17)
        store = LocalDynamicMap()
        rows = []
        for _ in range(2000):
            t = rng.randint(1, 5000)
            rec = gaze_record(t)
            store.insert(rec)
            rows = [r for r in rows if r.timestamp != t] + [rec]
            at = rng.randint(1, 6000)
            staleness = rng.randint(0, 800)
            got = store.latest(LdmLayer.INTERIOR, "dms0", QueryWindow(at, staleness))
            candidates = [r for r in rows if at - staleness <= r.timestamp <= at]
            expected = max(candidates, key=lambda r: r.timestamp, default=None)
            if expected is None:
                assert got is None
            else:
                assert got is not None and got.timestamp == expected.timestamp


class TestRange:
    def test_window(self):
        store = LocalDynamicMap()
        for t in (100, 200, 300, 400):
            store.insert(gaze_record(t))
        got = store.range(LdmLayer.INTERIOR, 150, 350)
        assert [r.timestamp for r in got] == [200, 300]

    def test_order_independent_of_insertion(self):
        times = [500, 100, 300, 200, 400]
        a, b = LocalDynamicMap(), LocalDynamicMap()
        for t in times:
            a.insert(gaze_record(t))
        for t in reversed(times):
            b.insert(gaze_record(t))
        assert [r.timestamp for r in a.range(LdmLayer.INTERIOR, 0, 1000)] == [
            r.timestamp for r in b.range(LdmLayer.INTERIOR, 0, 1000)
        ]

    def test_window_before_data(self):
        store = LocalDynamicMap()
        store.insert(gaze_record(1000))
        assert store.range(LdmLayer.INTERIOR, 1, 500) == []

    def test_rejects_inverted_window(self):
        store = LocalDynamicMap()
        with pytest.raises(LdmError):
            store.range(LdmLayer.INTERIOR, 10, 5)


class TestPrune:
    def test_dynamic_layers_pruned(self):
        store = LocalDynamicMap()
        for t in (100, 200, 300):
            store.insert(gaze_record(t))
            store.insert(det_record(t))
        removed = store.prune(250)
        assert removed == 4
        assert store.range(LdmLayer.INTERIOR, 0, 249) == []
        assert store.range(LdmLayer.DYNAMIC_EXTERIOR, 0, 249) == []

    def test_static_layer_survives(self):
        store = LocalDynamicMap()
        store.insert(LdmRecord(LdmLayer.STATIC, "map0", 100, {"tiles": 4}))
        store.insert(LdmRecord(LdmLayer.QUASI_STATIC, "signs0", 100, {"signs": []}))
        assert store.prune(10_000) == 0
        assert len(store.range(LdmLayer.STATIC, 0, 10_000)) == 1
        assert len(store.range(LdmLayer.QUASI_STATIC, 0, 10_000)) == 1

    def test_prune_empty_store(self):
        assert LocalDynamicMap().prune(1000) == 0

    def test_layer_sets(self):
        assert LdmLayer.STATIC not in DYNAMIC_LAYERS
        assert LdmLayer.INTERIOR in DYNAMIC_LAYERS


class TestDetectionMerge:
    def test_same_frame_objects_accumulate(self):
        store = LocalDynamicMap()
        d1 = ExteriorDetection(1000, "pedestrian", -4.0, 0.0, -1.9, 0.9, "p0")
        d2 = ExteriorDetection(1000, "pedestrian", -5.0, 1.0, -1.9, 0.9, "p1")
        store.add_detection("lidar0", d1)
        store.add_detection("lidar0", d2)
        got = store.latest(LdmLayer.DYNAMIC_EXTERIOR, "lidar0", QueryWindow(1000, 0))
        assert len(got.payload.detections) == 2


class TestSnapshot:
    def test_round_trip(self):
        store = LocalDynamicMap()
        store.insert(gaze_record(1000))
        store.insert(det_record(900))
        store.insert(LdmRecord(LdmLayer.STATIC, "map0", 1, {"name": "lot"}))
        text = store.export_snapshot()
        other = LocalDynamicMap()
        assert other.import_snapshot(text) == 3
        assert other.export_snapshot() == text

    def test_snapshot_insertion_order_independent(self):
        a, b = LocalDynamicMap(), LocalDynamicMap()
        records = [gaze_record(t) for t in (300, 100, 200)]
        for r in records:
            a.insert(r)
        for r in reversed(records):
            b.insert(r)
        assert a.export_snapshot() == b.export_snapshot()


class TestConcurrency:
    def test_parallel_writers_single_reader(self):
        store = LocalDynamicMap()
        errors = []

        def writer(source):
            try:
                for t in range(1, 301):
                    store.insert(gaze_record(t, source=source))
            except Exception as e:  # pragma: no cover
                errors.append(e)

        threads = [threading.Thread(target=writer, args=(f"dms{i}",)) for i in range(4)]
        for th in threads:
            th.start()
        for _ in range(50):
            store.range(LdmLayer.INTERIOR, 0, 1000)
            store.latest_any(LdmLayer.INTERIOR, QueryWindow(300, 300))
        for th in threads:
            th.join()
        assert not errors
        assert len(store.range(LdmLayer.INTERIOR, 1, 300)) == 4 * 300
