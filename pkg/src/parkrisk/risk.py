"""Risk scale, time-to-collision, and the gaze-awareness escalation rules.

The five-level scale is ordered; dataset class codes cover the four in-zone
levels only (very low marks points outside the assessed area and carries no
class).  Base risk depends on the distance band; a driver who is not looking
at the mirror covering a column has that column's high and moderate zones
escalated one step.  The closest center cell (C1) is always very high risk
because of the center-mirror blind spot, regardless of gaze.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

from .geometry import COLUMNS, ZoneLayout, ZoneRef

KMH_TO_MS = 1.0 / 3.6


class RiskLevel(enum.IntEnum):
    VERY_LOW = 0
    LOW = 1
    MODERATE = 2
    HIGH = 3
    VERY_HIGH = 4

    @property
    def wire(self) -> str:
        return self.name.lower()

    @classmethod
    def from_wire(cls, text: str) -> "RiskLevel":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown risk level {text!r}") from None

    @property
    def class_code(self) -> int | None:
        """Dataset class 0..3; very low has no class."""
        return None if self is RiskLevel.VERY_LOW else self.value - 1

    @classmethod
    def from_class_code(cls, code: int) -> "RiskLevel":
        if not 0 <= code <= 3:
            raise ValueError(f"risk class code must be 0..3, got {code}")
        return cls(code + 1)


# Display colors for the level scale; names are normative, hex is theme.
LEVEL_COLORS: Mapping[RiskLevel, tuple[str, str]] = {
    RiskLevel.VERY_LOW: ("gray", "#9e9e9e"),
    RiskLevel.LOW: ("green", "#43a047"),
    RiskLevel.MODERATE: ("yellow", "#fdd835"),
    RiskLevel.HIGH: ("orange", "#fb8c00"),
    RiskLevel.VERY_HIGH: ("red", "#e53935"),
}


class GazeTarget(str, enum.Enum):
    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"
    UNKNOWN = "unknown"

    @classmethod
    def from_wire(cls, text: str) -> "GazeTarget":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown gaze target {text!r}") from None


MIRROR_FOR_COLUMN: Mapping[str, GazeTarget] = {
    "L": GazeTarget.LEFT,
    "C": GazeTarget.CENTER,
    "R": GazeTarget.RIGHT,
}


@dataclass(frozen=True)
class RiskParameters:
    """Tunable scale parameters.

    reverse_speed: assumed backing speed, m/s (default 5 km/h).
    reaction_time: total driver reaction time, seconds; braking distance is
        excluded at parking speeds.
    a_zone_base: base level for the lateral A-zones.
    """

    reverse_speed: float = 5.0 * KMH_TO_MS
    reaction_time: float = 1.5
    a_zone_base: RiskLevel = RiskLevel.LOW

    def __post_init__(self) -> None:
        if self.reverse_speed <= 0:
            raise ValueError(f"reverse_speed must be > 0, got {self.reverse_speed}")
        if self.reaction_time <= 0:
            raise ValueError(f"reaction_time must be > 0, got {self.reaction_time}")


def ttc(distance: float, speed: float) -> float:
    """Time to collision: distance closed at the given speed, seconds."""
    if speed <= 0:
        raise ValueError(f"speed must be > 0, got {speed}")
    if distance < 0:
        raise ValueError(f"distance must be >= 0, got {distance}")
    return distance / speed


def stopping_distance(params: RiskParameters) -> float:
    """Meters covered before the driver can bring the car to a stop."""
    return params.reverse_speed * params.reaction_time


def base_risk(zone: ZoneRef, params: RiskParameters) -> RiskLevel:
    """Distance-driven risk of a zone, before awareness escalation."""
    if zone.kind == "outside":
        return RiskLevel.VERY_LOW
    if zone.kind == "a_zone":
        return params.a_zone_base
    if zone.column == "C" and zone.band == 1:
        return RiskLevel.VERY_HIGH
    if zone.band <= 2:
        return RiskLevel.HIGH
    if zone.band == 3:
        return RiskLevel.MODERATE
    return RiskLevel.LOW


def is_aware(column: str, gaze: GazeTarget) -> bool:
    """Whether the current mirror gaze covers the given column.

    Unknown gaze (stale or absent stream) counts as unaware everywhere.
    """
    return MIRROR_FOR_COLUMN.get(column) == gaze


_ESCALATION = {RiskLevel.HIGH: RiskLevel.VERY_HIGH, RiskLevel.MODERATE: RiskLevel.HIGH}


def escalate(base: RiskLevel, aware: bool) -> RiskLevel:
    """Escalation when the driver is unaware: high -> very high and
    moderate -> high; other levels are unchanged."""
    if aware:
        return base
    return _ESCALATION.get(base, base)


def _zone_column(zone: ZoneRef) -> str | None:
    if zone.kind == "cell":
        return zone.column
    if zone.kind == "a_zone":
        return "L" if zone.side == "left" else "R"
    return None


def assess(zone: ZoneRef, gaze: GazeTarget, params: RiskParameters) -> RiskLevel:
    """Final risk level for a zone given the driver's current mirror gaze."""
    if zone.kind == "outside":
        return RiskLevel.VERY_LOW
    if zone.kind == "cell" and zone.column == "C" and zone.band == 1:
        return RiskLevel.VERY_HIGH
    column = _zone_column(zone)
    return escalate(base_risk(zone, params), is_aware(column, gaze))


def zone_refs(layout: ZoneLayout, include_a_zones: bool = True) -> list[ZoneRef]:
    """All zone references of a layout: cells, A-zones, then outside."""
    refs = [
        ZoneRef.cell(col, band)
        for band in range(1, len(layout.band_edges) + 1)
        for col in COLUMNS
    ]
    if include_a_zones and layout.a_zones_enabled:
        refs.extend(ZoneRef.a_zone(layout.a_zone_side(i)) for i in range(len(layout.a_zones)))
    refs.append(ZoneRef.outside())
    return refs


@dataclass(frozen=True)
class RiskMatrix:
    """Materialized (zone, awareness) -> level table used by golden tests
    and zone coloring."""

    entries: Mapping[tuple[str, bool], RiskLevel]
    band_count: int

    def level(self, zone: ZoneRef, aware: bool) -> RiskLevel:
        return self.entries[(zone.label, aware)]

    def for_gaze(self, gaze: GazeTarget, params: RiskParameters) -> dict[str, RiskLevel]:
        """Per-zone-label levels under one gaze state."""
        out = {}
        for (label, aware), level in self.entries.items():
            zone = ZoneRef.from_label(label)
            column = _zone_column(zone)
            if column is None or is_aware(column, gaze) == aware:
                out[label] = level
        return out

    def to_lines(self) -> list[str]:
        """Stable one-entry-per-line export (label awareness level)."""
        lines = []
        for (label, aware), level in sorted(
            self.entries.items(), key=lambda kv: (kv[0][0], not kv[0][1])
        ):
            lines.append(f"{label} {'aware' if aware else 'unaware'} {level.wire}")
        return lines

    def render_table(self, gaze: GazeTarget, params: RiskParameters) -> str:
        """Plain-text band x column table for one gaze state."""
        levels = self.for_gaze(gaze, params)
        width = 11
        header = "zone".ljust(6) + "".join(c.ljust(width) for c in COLUMNS)
        rows = [f"risk levels (gaze={gaze.value})", header]
        for band in range(1, self.band_count + 1):
            cells = [levels[f"{c}{band}"].wire.ljust(width) for c in COLUMNS]
            rows.append(str(band).ljust(6) + "".join(cells))
        a_cells = [
            levels.get("AL", None),
            None,
            levels.get("AR", None),
        ]
        if a_cells[0] is not None or a_cells[2] is not None:
            rendered = [(c.wire if c is not None else "-").ljust(width) for c in a_cells]
            rows.append("A".ljust(6) + "".join(rendered))
        out = levels["OUT"].wire.ljust(width)
        rows.append("OUT".ljust(6) + out * len(COLUMNS))
        return "\n".join(r.rstrip() for r in rows) + "\n"


def risk_matrix(params: RiskParameters, layout: ZoneLayout | None = None) -> RiskMatrix:
    """Build the full awareness table for a layout (default layout if None)."""
    layout = layout or ZoneLayout()
    entries: dict[tuple[str, bool], RiskLevel] = {}
    for zone in zone_refs(layout):
        for aware in (True, False):
            base = base_risk(zone, params)
            if zone.kind == "outside":
                level = RiskLevel.VERY_LOW
            elif zone.kind == "cell" and zone.column == "C" and zone.band == 1:
                level = RiskLevel.VERY_HIGH
            else:
                level = escalate(base, aware)
            entries[(zone.label, aware)] = level
    return RiskMatrix(entries=entries, band_count=len(layout.band_edges))
