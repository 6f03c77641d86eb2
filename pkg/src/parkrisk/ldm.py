"""Layered, time-indexed local dynamic map.

Five layers: the classic static / quasi-static / semi-dynamic / dynamic
split of environment data plus an interior layer for driver-monitoring
events.  Records are immutable after insert and kept in a per-(layer,
source) ordered time index, so queries are pure functions of the record
set regardless of insertion order.

The store is embedded and in-process; an external time-series engine could
be swapped in behind the same interface.
"""

from __future__ import annotations

import enum
import json
import threading
from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass

from .percepts import DetectionSet, ExteriorDetection, GazeEvent
from .risk import GazeTarget

DEFAULT_GAZE_STALENESS_MS = 500
DEFAULT_DETECTION_STALENESS_MS = 200


class LdmLayer(enum.Enum):
    STATIC = "static"
    QUASI_STATIC = "quasi_static"
    SEMI_DYNAMIC = "semi_dynamic"
    DYNAMIC_EXTERIOR = "dynamic_exterior"
    INTERIOR = "interior"


# Layers subject to retention pruning; the slow layers are exempt.
DYNAMIC_LAYERS = frozenset(
    {LdmLayer.SEMI_DYNAMIC, LdmLayer.DYNAMIC_EXTERIOR, LdmLayer.INTERIOR}
)


class LdmError(ValueError):
    """Raised for invalid records or malformed queries."""


@dataclass(frozen=True)
class LdmRecord:
    """One stored entry: a payload tagged by layer, source and timestamp.

    Gaze events live only in the interior layer, detection sets only in the
    dynamic exterior layer; the remaining layers take opaque dict blobs.
    """

    layer: LdmLayer
    source_id: str
    timestamp: int
    payload: DetectionSet | GazeEvent | dict

    def __post_init__(self) -> None:
        if self.timestamp <= 0:
            raise LdmError(f"timestamp must be positive, got {self.timestamp}")
        if isinstance(self.payload, GazeEvent):
            if self.layer is not LdmLayer.INTERIOR:
                raise LdmError("gaze events belong to the interior layer")
        elif isinstance(self.payload, DetectionSet):
            if self.layer is not LdmLayer.DYNAMIC_EXTERIOR:
                raise LdmError("detection sets belong to the dynamic exterior layer")
        elif isinstance(self.payload, dict):
            if self.layer in (LdmLayer.INTERIOR, LdmLayer.DYNAMIC_EXTERIOR):
                raise LdmError(f"layer {self.layer.value} requires a typed payload")
        else:
            raise LdmError(f"unsupported payload type {type(self.payload).__name__}")


@dataclass(frozen=True)
class QueryWindow:
    """Reference time plus the maximum age of a usable record."""

    at: int
    staleness: int

    def __post_init__(self) -> None:
        if self.staleness < 0:
            raise LdmError(f"staleness must be >= 0, got {self.staleness}")


class LocalDynamicMap:
    """Thread-safe embedded store with per-source ordered time indexes.

    One logical writer per source plus any number of readers; readers get
    consistent snapshots because records are immutable and index mutations
    happen under the lock.
    """

    def __init__(self) -> None:
        self._lock = threading.RLock()
        # (layer, source) -> (sorted timestamps, timestamp -> record)
        self._index: dict[tuple[LdmLayer, str], tuple[list[int], dict[int, LdmRecord]]] = {}

    def insert(self, record: LdmRecord) -> None:
        """Store a record; an equal (layer, source, timestamp) key overwrites."""
        key = (record.layer, record.source_id)
        with self._lock:
            times, by_time = self._index.setdefault(key, ([], {}))
            if record.timestamp not in by_time:
                insort(times, record.timestamp)
            by_time[record.timestamp] = record

    def add_detection(self, source_id: str, detection: ExteriorDetection) -> None:
        """Merge one detection into the set stored for its timestamp.

        Detection streams deliver one object per line, but the store keys on
        (layer, source, timestamp), so same-frame objects accumulate here.
        """
        key = (LdmLayer.DYNAMIC_EXTERIOR, source_id)
        with self._lock:
            times, by_time = self._index.setdefault(key, ([], {}))
            existing = by_time.get(detection.timestamp)
            dets = existing.payload.detections if existing else ()
            payload = DetectionSet(detection.timestamp, dets + (detection,))
            if existing is None:
                insort(times, detection.timestamp)
            by_time[detection.timestamp] = LdmRecord(
                LdmLayer.DYNAMIC_EXTERIOR, source_id, detection.timestamp, payload
            )

    def latest(
        self, layer: LdmLayer, source_id: str, window: QueryWindow
    ) -> LdmRecord | None:
        """Freshest record at or before window.at that is not stale."""
        with self._lock:
            entry = self._index.get((layer, source_id))
            if entry is None:
                return None
            times, by_time = entry
            i = bisect_right(times, window.at) - 1
            if i < 0 or times[i] < window.at - window.staleness:
                return None
            return by_time[times[i]]

    def latest_any(self, layer: LdmLayer, window: QueryWindow) -> LdmRecord | None:
        """Freshest usable record across all sources of a layer.

        Timestamp ties resolve to the smallest source id so results do not
        depend on insertion order.
        """
        with self._lock:
            best: LdmRecord | None = None
            for (rec_layer, source_id) in sorted(
                self._index, key=lambda k: k[1]
            ):
                if rec_layer is not layer:
                    continue
                candidate = self.latest(layer, source_id, window)
                if candidate is None:
                    continue
                if best is None or candidate.timestamp > best.timestamp:
                    best = candidate
            return best

    def range(self, layer: LdmLayer, t0: int, t1: int) -> list[LdmRecord]:
        """All records of a layer with t0 <= timestamp <= t1, time-ascending."""
        if t0 > t1:
            raise LdmError(f"invalid range: {t0} > {t1}")
        with self._lock:
            rows: list[tuple[int, str, LdmRecord]] = []
            for (rec_layer, source_id), (times, by_time) in self._index.items():
                if rec_layer is not layer:
                    continue
                lo = bisect_left(times, t0)
                hi = bisect_right(times, t1)
                rows.extend((t, source_id, by_time[t]) for t in times[lo:hi])
            rows.sort(key=lambda r: (r[0], r[1]))
            return [record for _, _, record in rows]

    def prune(self, before: int) -> int:
        """Drop dynamic-layer records older than `before`; returns the count."""
        removed = 0
        with self._lock:
            for (layer, _), (times, by_time) in self._index.items():
                if layer not in DYNAMIC_LAYERS:
                    continue
                cut = bisect_left(times, before)
                for t in times[:cut]:
                    del by_time[t]
                removed += cut
                del times[:cut]
        return removed

    def sources(self, layer: LdmLayer) -> list[str]:
        with self._lock:
            return sorted(s for (l, s) in self._index if l is layer)

    def export_snapshot(self) -> str:
        """Deterministic line-delimited dump of the whole store."""
        with self._lock:
            keys = sorted(self._index, key=lambda k: (k[0].value, k[1]))
            lines = []
            for key in keys:
                times, by_time = self._index[key]
                for t in times:
                    lines.append(_record_to_line(by_time[t]))
        return "".join(line + "\n" for line in lines)

    def import_snapshot(self, text: str) -> int:
        """Load records from an export_snapshot dump; returns the count."""
        count = 0
        for line in text.splitlines():
            if not line.strip():
                continue
            self.insert(_record_from_line(line))
            count += 1
        return count


def _record_to_line(record: LdmRecord) -> str:
    payload = record.payload
    body: dict = {
        "layer": record.layer.value,
        "src": record.source_id,
        "t": record.timestamp,
    }
    if isinstance(payload, GazeEvent):
        body["kind"] = "gaze"
        body["target"] = payload.target.value
        body["conf"] = payload.confidence
    elif isinstance(payload, DetectionSet):
        body["kind"] = "det_set"
        body["detections"] = [
            {
                "class": d.object_class,
                "x": d.x,
                "y": d.y,
                "z": d.z,
                "conf": d.confidence,
                **({"track": d.track_id} if d.track_id is not None else {}),
            }
            for d in payload.detections
        ]
    else:
        body["kind"] = "blob"
        body["data"] = payload
    return json.dumps(body, sort_keys=True)


def _record_from_line(line: str) -> LdmRecord:
    body = json.loads(line)
    layer = LdmLayer(body["layer"])
    t = int(body["t"])
    src = body["src"]
    kind = body["kind"]
    if kind == "gaze":
        payload: DetectionSet | GazeEvent | dict = GazeEvent(
            t, GazeTarget.from_wire(body["target"]), float(body["conf"])
        )
    elif kind == "det_set":
        payload = DetectionSet(
            t,
            tuple(
                ExteriorDetection(
                    t,
                    d["class"],
                    float(d["x"]),
                    float(d["y"]),
                    float(d["z"]),
                    float(d["conf"]),
                    d.get("track"),
                )
                for d in body["detections"]
            ),
        )
    else:
        payload = body["data"]
    return LdmRecord(layer, src, t, payload)
