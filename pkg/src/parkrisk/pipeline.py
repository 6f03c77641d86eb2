"""The assessment pipeline: join gaze and detections through the dynamic
map, emit per-pedestrian risk, and score predictions against labeled frames.

Frames are treated as independent events in time: each tick reads the
freshest non-stale gaze and detection records, transforms pedestrian
detections into the assessment frame, and scores them.  Cars are kept in
the store for display but are never risk-assessed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .config import AppConfig
from .geometry import GroundPoint, ZoneRef, distance_to_bumper, locate, sensor_to_assessment
from .ldm import LdmLayer, LocalDynamicMap, QueryWindow
from .risk import GazeTarget, RiskLevel, assess
from . import ingest
from .tables import render_block_table, scenario_order

DETECTIONS_FILE = "detections.jsonl"
GAZE_FILE = "gaze.jsonl"
TRUTH_FILE = "truth.jsonl"

# Reference accuracies used as a comparison row in evaluation reports.
REFERENCE_ACCURACIES = {"zone": 0.92, "gaze": 0.73, "risk": 0.83}


@dataclass(frozen=True)
class RiskAssessment:
    """Risk verdict for one pedestrian at one instant."""

    timestamp: int
    pedestrian: str
    x: float
    y: float
    zone: ZoneRef
    distance: float
    ttc: float
    gaze_used: GazeTarget
    risk: RiskLevel


@dataclass(frozen=True)
class FramePrediction:
    """All assessments of one tick plus the scene maximum."""

    timestamp: int
    gaze_used: GazeTarget
    assessments: tuple[RiskAssessment, ...]
    scene_risk: RiskLevel


@dataclass(frozen=True)
class TruthPed:
    track: str | None
    x: float
    y: float
    zone_label: str
    risk: RiskLevel


@dataclass(frozen=True)
class TruthFrame:
    timestamp: int
    scenario: str
    gaze: GazeTarget
    peds: tuple[TruthPed, ...]
    scene_risk: RiskLevel


class AlignmentError(ValueError):
    """Prediction and truth frame sets do not cover the same timestamps."""

    def __init__(self, missing_predictions: list[int], missing_truth: list[int]):
        self.missing_predictions = missing_predictions
        self.missing_truth = missing_truth
        parts = []
        if missing_predictions:
            parts.append(f"timestamps missing from predictions: {missing_predictions[:10]}")
        if missing_truth:
            parts.append(f"timestamps missing from truth: {missing_truth[:10]}")
        super().__init__("; ".join(parts))


def tick(ldm: LocalDynamicMap, now: int, cfg: AppConfig) -> FramePrediction:
    """Assess the scene at time `now` from the current store contents.

    Missing or stale gaze degrades to unknown (treated as unaware of every
    column).  Every pedestrian detection gets an assessment, including ones
    outside the processed range, which score very low risk.
    """
    gaze_rec = ldm.latest_any(
        LdmLayer.INTERIOR, QueryWindow(now, cfg.staleness.gaze_ms)
    )
    gaze_used = gaze_rec.payload.target if gaze_rec is not None else GazeTarget.UNKNOWN

    det_rec = ldm.latest_any(
        LdmLayer.DYNAMIC_EXTERIOR, QueryWindow(now, cfg.staleness.detections_ms)
    )
    assessments: list[RiskAssessment] = []
    if det_rec is not None:
        for i, det in enumerate(det_rec.payload.detections):
            if det.object_class != "pedestrian":
                continue
            point = sensor_to_assessment((det.x, det.y, det.z), cfg.extrinsics)
            ground = GroundPoint(point.x, point.y, 0.0)
            zone = locate(ground, cfg.layout)
            dist = distance_to_bumper(ground, cfg.layout)
            assessments.append(
                RiskAssessment(
                    timestamp=det_rec.timestamp,
                    pedestrian=det.track_id if det.track_id is not None else f"ped{i}",
                    x=ground.x,
                    y=ground.y,
                    zone=zone,
                    distance=dist,
                    ttc=dist / cfg.params.reverse_speed,
                    gaze_used=gaze_used,
                    risk=assess(zone, gaze_used, cfg.params),
                )
            )
    scene = max((a.risk for a in assessments), default=RiskLevel.VERY_LOW)
    return FramePrediction(now, gaze_used, tuple(assessments), scene)


def frame_to_line(frame: FramePrediction) -> str:
    """One frame per line; this is also the stream message body."""
    body = {
        "t": frame.timestamp,
        "gaze": frame.gaze_used.value,
        "scene_risk": frame.scene_risk.wire,
        "assessments": [
            {
                "t": a.timestamp,
                "ped": a.pedestrian,
                "x": a.x,
                "y": a.y,
                "zone": a.zone.label,
                "dist": a.distance,
                "ttc": a.ttc,
                "risk": a.risk.wire,
            }
            for a in frame.assessments
        ],
    }
    return json.dumps(body, separators=(",", ":"))


def frame_from_line(text: str) -> FramePrediction:
    body = json.loads(text)
    gaze = GazeTarget.from_wire(body["gaze"])
    assessments = tuple(
        RiskAssessment(
            timestamp=int(a["t"]),
            pedestrian=a["ped"],
            x=float(a["x"]),
            y=float(a["y"]),
            zone=ZoneRef.from_label(a["zone"]),
            distance=float(a["dist"]),
            ttc=float(a["ttc"]),
            gaze_used=gaze,
            risk=RiskLevel.from_wire(a["risk"]),
        )
        for a in body["assessments"]
    )
    return FramePrediction(
        int(body["t"]), gaze, assessments, RiskLevel.from_wire(body["scene_risk"])
    )


def truth_to_line(frame: TruthFrame) -> str:
    body = {
        "t": frame.timestamp,
        "kind": "truth",
        "scenario": frame.scenario,
        "gaze": frame.gaze.value,
        "peds": [
            {
                **({"track": p.track} if p.track is not None else {}),
                "x": p.x,
                "y": p.y,
                "zone": p.zone_label,
                "risk": p.risk.wire,
            }
            for p in frame.peds
        ],
        "scene_risk": frame.scene_risk.wire,
    }
    return json.dumps(body, separators=(",", ":"))


def truth_from_line(text: str, lineno: int | None = None) -> TruthFrame:
    try:
        body = json.loads(text)
    except json.JSONDecodeError as e:
        raise ingest.ParseError(f"invalid JSON: {e.msg}", lineno) from None
    peds = tuple(
        TruthPed(
            track=p.get("track"),
            x=float(p["x"]),
            y=float(p["y"]),
            zone_label=ZoneRef.from_label(p["zone"]).label,
            risk=RiskLevel.from_wire(p["risk"]),
        )
        for p in body.get("peds", [])
    )
    return TruthFrame(
        timestamp=int(body["t"]),
        scenario=body.get("scenario", "exterior"),
        gaze=GazeTarget.from_wire(body["gaze"]),
        peds=peds,
        scene_risk=RiskLevel.from_wire(body["scene_risk"]),
    )


def load_truth(path: str) -> list[TruthFrame]:
    frames = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if line.strip():
                frames.append(truth_from_line(line, lineno))
    frames.sort(key=lambda fr: fr.timestamp)
    return frames


@dataclass
class CellTally:
    zone_total: int = 0
    zone_correct: int = 0
    gaze_total: int = 0
    gaze_correct: int = 0
    risk_total: int = 0
    risk_correct: int = 0


def _accuracy(correct: int, total: int) -> float | None:
    return None if total == 0 else correct / total


@dataclass
class EvaluationReport:
    """Per-cell and overall accuracy of zone, gaze and end-to-end risk."""

    cells: dict[tuple[str, str], CellTally] = field(default_factory=dict)
    gaze_confusion: dict[str, dict[str, int]] = field(default_factory=dict)
    risk_confusion: dict[str, dict[str, int]] = field(default_factory=dict)
    zone_confusion: dict[str, dict[str, int]] = field(default_factory=dict)
    frame_count: int = 0

    def _sum(self, attr: str) -> int:
        return sum(getattr(c, attr) for c in self.cells.values())

    @property
    def zone_accuracy(self) -> float:
        return self._sum("zone_correct") / max(1, self._sum("zone_total"))

    @property
    def gaze_accuracy(self) -> float:
        return self._sum("gaze_correct") / max(1, self._sum("gaze_total"))

    @property
    def risk_accuracy(self) -> float:
        return self._sum("risk_correct") / max(1, self._sum("risk_total"))

    def to_dict(self) -> dict:
        return {
            "frames": self.frame_count,
            "accuracy": {
                "zone": self.zone_accuracy,
                "gaze": self.gaze_accuracy,
                "risk": self.risk_accuracy,
            },
            "cells": {
                f"{scenario}/{gaze}": {
                    "zone": _accuracy(c.zone_correct, c.zone_total),
                    "gaze": _accuracy(c.gaze_correct, c.gaze_total),
                    "risk": _accuracy(c.risk_correct, c.risk_total),
                }
                for (scenario, gaze), c in sorted(self.cells.items())
            },
            "confusion": {
                "gaze": self.gaze_confusion,
                "risk": self.risk_confusion,
                "zone": self.zone_confusion,
            },
        }

    def render_text(self, reference: dict[str, float] | None = None) -> str:
        """Accuracy table: detector rows by scenario and true-gaze columns."""
        groups = scenario_order({s for s, _ in self.cells})
        rows = []
        for label, num, den in (
            ("Ped. detector", "zone_correct", "zone_total"),
            ("Gaze detector", "gaze_correct", "gaze_total"),
            ("DRAS", "risk_correct", "risk_total"),
        ):
            cells = {}
            for (scenario, gaze), tally in self.cells.items():
                acc = _accuracy(getattr(tally, num), getattr(tally, den))
                if acc is not None:
                    cells[(scenario, gaze)] = f"{acc:.2f}"
            total = _accuracy(self._sum(num), self._sum(den))
            rows.append((label, cells, "-" if total is None else f"{total:.2f}"))
        text = render_block_table("Scenario", "Driver gaze", groups, rows, "Acc")
        if reference is not None:
            text += (
                "reference     |"
                f" ped {reference['zone']:.2f}  gaze {reference['gaze']:.2f}"
                f"  DRAS {reference['risk']:.2f}\n"
            )
        return text


def _bump(matrix: dict[str, dict[str, int]], truth: str, predicted: str) -> None:
    matrix.setdefault(truth, {})
    matrix[truth][predicted] = matrix[truth].get(predicted, 0) + 1


def evaluate(
    predictions: list[FramePrediction], truths: list[TruthFrame]
) -> EvaluationReport:
    """Score predictions against labeled frames aligned by timestamp.

    Pedestrian rows are matched by track id when the truth carries ids,
    otherwise zone rows compare the frame's zone multiset and risk rows
    compare the frame's maximum risk.
    """
    pred_by_t = {p.timestamp: p for p in predictions}
    truth_by_t = {t.timestamp: t for t in truths}
    missing_pred = sorted(set(truth_by_t) - set(pred_by_t))
    missing_truth = sorted(set(pred_by_t) - set(truth_by_t))
    if missing_pred or missing_truth:
        raise AlignmentError(missing_pred, missing_truth)

    report = EvaluationReport()
    for t, truth in sorted(truth_by_t.items()):
        pred = pred_by_t[t]
        cell = report.cells.setdefault((truth.scenario, truth.gaze.value), CellTally())
        report.frame_count += 1

        cell.gaze_total += 1
        _bump(report.gaze_confusion, truth.gaze.value, pred.gaze_used.value)
        if pred.gaze_used == truth.gaze:
            cell.gaze_correct += 1

        if truth.peds and all(p.track is not None for p in truth.peds):
            by_track = {a.pedestrian: a for a in pred.assessments}
            for ped in truth.peds:
                found = by_track.get(ped.track)
                zone_pred = found.zone.label if found else "missing"
                risk_pred = found.risk.wire if found else "missing"
                cell.zone_total += 1
                cell.risk_total += 1
                _bump(report.zone_confusion, ped.zone_label, zone_pred)
                _bump(report.risk_confusion, ped.risk.wire, risk_pred)
                if zone_pred == ped.zone_label:
                    cell.zone_correct += 1
                if risk_pred == ped.risk.wire:
                    cell.risk_correct += 1
        else:
            truth_zones = sorted(p.zone_label for p in truth.peds)
            pred_zones = sorted(a.zone.label for a in pred.assessments)
            cell.zone_total += 1
            if truth_zones == pred_zones:
                cell.zone_correct += 1
            cell.risk_total += 1
            _bump(report.risk_confusion, truth.scene_risk.wire, pred.scene_risk.wire)
            if pred.scene_risk == truth.scene_risk:
                cell.risk_correct += 1
    return report


@dataclass
class ReplayRunResult:
    frames: list[FramePrediction]
    truths: list[TruthFrame]
    report: EvaluationReport


def run_replay(dataset_dir: str, cfg: AppConfig, lenient: bool = False) -> ReplayRunResult:
    """Ingest a recorded dataset, tick at each frame timestamp, and score."""
    store = LocalDynamicMap()
    ingest.replay(os.path.join(dataset_dir, DETECTIONS_FILE), store, lenient=lenient)
    ingest.replay(os.path.join(dataset_dir, GAZE_FILE), store, lenient=lenient)
    truths = load_truth(os.path.join(dataset_dir, TRUTH_FILE))
    frames = [tick(store, truth.timestamp, cfg) for truth in truths]
    return ReplayRunResult(frames, truths, evaluate(frames, truths))
