"""Parsing and feeding of detection/gaze streams into the dynamic map.

Wire format is UTF-8, newline-delimited JSON, one record per line:

    {"t":1000,"src":"lidar0","kind":"det","class":"pedestrian",
     "x":-4.5,"y":0.2,"z":-1.9,"conf":0.91,"track":"p0"}
    {"t":1000,"src":"dms0","kind":"gaze","target":"right","conf":0.8}

Detection coordinates are in the sensor frame.  Unknown object classes map
to "other"; the gaze target vocabulary is closed.  Line orientation keeps
streaming simple and lets replay tolerate isolated bad lines.
"""

from __future__ import annotations

import json
import socketserver
import threading
import time
from dataclasses import dataclass
from typing import Callable

from .ldm import LdmLayer, LdmRecord, LocalDynamicMap
from .percepts import ExteriorDetection, GazeEvent
from .risk import GazeTarget

GAZE_TARGETS = frozenset(t.value for t in GazeTarget)


class LineError(ValueError):
    """A bad input line; carries the 1-based line number when known."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


class ParseError(LineError):
    pass


class ValidationError(LineError):
    pass


@dataclass(frozen=True)
class ParsedLine:
    source_id: str
    record: ExteriorDetection | GazeEvent


def parse_line(text: str, lineno: int | None = None) -> ParsedLine:
    """Parse one wire-format line into a typed percept record."""
    try:
        body = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", lineno) from None
    if not isinstance(body, dict):
        raise ParseError("record must be a JSON object", lineno)
    kind = body.get("kind")
    if kind == "det":
        return _parse_detection(body, lineno)
    if kind == "gaze":
        return _parse_gaze(body, lineno)
    raise ParseError(f"unknown record kind {kind!r}", lineno)


def _timestamp(body: dict, lineno: int | None) -> int:
    t = body.get("t")
    if not isinstance(t, int) or isinstance(t, bool) or t <= 0:
        raise ValidationError(f"timestamp must be a positive integer, got {t!r}", lineno)
    return t


def _source(body: dict, lineno: int | None) -> str:
    src = body.get("src")
    if not isinstance(src, str) or not src:
        raise ParseError("missing source id field 'src'", lineno)
    return src


def _confidence(body: dict, lineno: int | None) -> float:
    conf = body.get("conf", 1.0)
    try:
        conf = float(conf)
    except (TypeError, ValueError):
        raise ParseError(f"confidence must be a number, got {conf!r}", lineno) from None
    if not 0.0 <= conf <= 1.0:
        raise ValidationError(f"confidence out of range [0, 1]: {conf}", lineno)
    return conf


def _parse_detection(body: dict, lineno: int | None) -> ParsedLine:
    t = _timestamp(body, lineno)
    try:
        x, y, z = (float(body[k]) for k in ("x", "y", "z"))
    except (KeyError, TypeError, ValueError):
        raise ParseError("detection needs numeric x, y, z", lineno) from None
    conf = _confidence(body, lineno)
    src = _source(body, lineno)
    cls = body.get("class", "other")
    track = body.get("track")
    if track is not None and not isinstance(track, str):
        raise ParseError("track id must be a string", lineno)
    try:
        det = ExteriorDetection(t, cls, x, y, z, conf, track)
    except ValueError as e:
        raise ValidationError(str(e), lineno) from None
    return ParsedLine(src, det)


def _parse_gaze(body: dict, lineno: int | None) -> ParsedLine:
    t = _timestamp(body, lineno)
    target = body.get("target")
    if target not in GAZE_TARGETS:
        raise ParseError(f"unknown gaze target {target!r}", lineno)
    conf = _confidence(body, lineno)
    src = _source(body, lineno)
    return ParsedLine(src, GazeEvent(t, GazeTarget(target), conf))


def serialize(source_id: str, record: ExteriorDetection | GazeEvent) -> str:
    """Inverse of parse_line; field order is fixed for byte determinism."""
    if isinstance(record, ExteriorDetection):
        body: dict = {
            "t": record.timestamp,
            "src": source_id,
            "kind": "det",
            "class": record.object_class,
            "x": record.x,
            "y": record.y,
            "z": record.z,
            "conf": record.confidence,
        }
        if record.track_id is not None:
            body["track"] = record.track_id
    elif isinstance(record, GazeEvent):
        body = {
            "t": record.timestamp,
            "src": source_id,
            "kind": "gaze",
            "target": record.target.value,
            "conf": record.confidence,
        }
    else:
        raise TypeError(f"cannot serialize {type(record).__name__}")
    return json.dumps(body, separators=(",", ":"))


def insert_parsed(sink: LocalDynamicMap, parsed: ParsedLine) -> None:
    """Route a parsed percept into its layer of the store."""
    if isinstance(parsed.record, ExteriorDetection):
        sink.add_detection(parsed.source_id, parsed.record)
    else:
        sink.insert(
            LdmRecord(
                LdmLayer.INTERIOR, parsed.source_id, parsed.record.timestamp, parsed.record
            )
        )


@dataclass
class ReplaySummary:
    inserted: int = 0
    errors: int = 0
    duration_s: float = 0.0
    error_lines: list[str] | None = None


def replay(
    path: str,
    sink: LocalDynamicMap,
    speed_factor: float | None = None,
    lenient: bool = False,
    sleep: Callable[[float], None] = time.sleep,
) -> ReplaySummary:
    """Feed a recorded file into the store in timestamp order.

    speed_factor None means as fast as possible; otherwise inter-record
    gaps are scaled by 1/speed_factor.  In lenient mode bad lines are
    counted and skipped instead of aborting the replay.
    """
    if speed_factor is not None and speed_factor <= 0:
        raise ValueError(f"speed_factor must be > 0, got {speed_factor}")
    started = time.monotonic()
    summary = ReplaySummary(error_lines=[])
    parsed_rows: list[ParsedLine] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                parsed_rows.append(parse_line(line, lineno))
            except LineError as e:
                if not lenient:
                    raise
                summary.errors += 1
                summary.error_lines.append(str(e))
    parsed_rows.sort(key=lambda p: p.record.timestamp)
    previous_t: int | None = None
    for parsed in parsed_rows:
        if speed_factor is not None and previous_t is not None:
            gap_s = (parsed.record.timestamp - previous_t) / 1000.0
            if gap_s > 0:
                sleep(gap_s / speed_factor)
        insert_parsed(sink, parsed)
        summary.inserted += 1
        previous_t = parsed.record.timestamp
    summary.duration_s = time.monotonic() - started
    return summary


class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        server: IngestServer = self.server  # type: ignore[assignment]
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            try:
                parsed = parse_line(line)
            except LineError as e:
                server.note_error(str(e))
                continue
            if not server.accepting:
                break
            insert_parsed(server.sink, parsed)
            server.note_insert()


class IngestServer(socketserver.ThreadingTCPServer):
    """Line-delimited TCP ingest endpoint writing into a dynamic map."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], sink: LocalDynamicMap):
        super().__init__(address, _LineHandler)
        self.sink = sink
        self.accepting = True
        self._stats_lock = threading.Lock()
        self._inserted = 0
        self._errors = 0
        self._thread: threading.Thread | None = None

    def note_insert(self) -> None:
        with self._stats_lock:
            self._inserted += 1

    def note_error(self, message: str) -> None:
        with self._stats_lock:
            self._errors += 1

    @property
    def stats(self) -> tuple[int, int]:
        with self._stats_lock:
            return self._inserted, self._errors

    def start(self) -> None:
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> tuple[int, int]:
        """Orderly shutdown; returns (inserted, errors)."""
        self.accepting = False
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
        return self.stats


def listen(host: str, port: int, sink: LocalDynamicMap) -> IngestServer:
    """Bind a streaming ingest endpoint and start accepting lines."""
    server = IngestServer((host, port), sink)
    server.start()
    return server
