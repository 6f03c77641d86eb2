"""Time-stamped percept records produced by the exterior and interior sensors.

Detections arrive in the sensor frame; the transform into the assessment
frame happens in the pipeline, so raw data stays raw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .risk import GazeTarget

OBJECT_CLASSES = ("pedestrian", "car", "other")


def _check_confidence(confidence: float) -> None:
    if not 0.0 <= confidence <= 1.0:
        raise ValueError(f"confidence must be in [0, 1], got {confidence}")


@dataclass(frozen=True)
class ExteriorDetection:
    """One detected object in the sensor frame at one instant."""

    timestamp: int
    object_class: str
    x: float
    y: float
    z: float
    confidence: float
    track_id: str | None = None

    def __post_init__(self) -> None:
        if self.object_class not in OBJECT_CLASSES:
            object.__setattr__(self, "object_class", "other")
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError("detection position must be finite")
        _check_confidence(self.confidence)


@dataclass(frozen=True)
class DetectionSet:
    """All detections one source reported for one timestamp."""

    timestamp: int
    detections: tuple[ExteriorDetection, ...]


@dataclass(frozen=True)
class GazeEvent:
    """Which rear-view mirror the driver is looking at."""

    timestamp: int
    target: GazeTarget
    confidence: float

    def __post_init__(self) -> None:
        _check_confidence(self.confidence)
