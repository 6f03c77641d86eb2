"""Vehicle-relative frames and the partition of the rear area into risk zones.

Assessment frame: origin at the center of the rear bumper projected to the
ground, x positive rearward (behind the vehicle), y positive toward the
vehicle's left side, z up.  The sensor frame points forward (x forward,
y left, z up) and sits at the extrinsics offset from the bumper origin.

Everything in this module is pure and layouts are immutable, so values can
be shared freely across threads.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

from shapely.geometry import LineString, Polygon, box

COLUMNS = ("L", "C", "R")

Vertex = tuple[float, float]


class LayoutError(ValueError):
    """Raised for zone layouts that cannot be partitioned consistently."""


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class GroundPoint:
    """A point in the assessment frame (meters). z defaults to ground level."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self) -> None:
        _require_finite("GroundPoint coordinates", self.x, self.y, self.z)


@dataclass(frozen=True)
class SensorExtrinsics:
    """Pose of the exterior sensor relative to the bumper-ground origin.

    forward_offset: meters the sensor sits forward of the rear bumper.
    lateral_offset: meters left of the vehicle centerline.
    height: meters above ground (must be positive).
    yaw: rotation of the sensor frame about the vertical axis, radians.
    """

    forward_offset: float
    lateral_offset: float = 0.0
    height: float = 1.9
    yaw: float = 0.0

    def __post_init__(self) -> None:
        _require_finite(
            "extrinsics", self.forward_offset, self.lateral_offset, self.height, self.yaw
        )
        if self.height <= 0:
            raise ValueError(f"sensor height must be > 0, got {self.height}")


@dataclass(frozen=True)
class DivisionLine:
    """A mirror-visibility boundary line through two assessment-frame points."""

    p0: Vertex
    p1: Vertex

    def __post_init__(self) -> None:
        _require_finite("division line", *self.p0, *self.p1)
        if self.p0 == self.p1:
            raise LayoutError("division line needs two distinct points")

    def side_of(self, x: float, y: float) -> float:
        """Signed cross product; positive on the +y side of the directed line."""
        (x0, y0), (x1, y1) = self.p0, self.p1
        return (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0)


DEFAULT_LEFT_LINE = DivisionLine((0.0, 0.875), (4.0, 2.0))
DEFAULT_RIGHT_LINE = DivisionLine((0.0, -0.875), (4.0, -2.0))


def chamfered_a_zone(
    half_width: float,
    side: str,
    length: float = 2.0,
    width: float = 1.0,
    chamfer: float = 0.5,
) -> tuple[Vertex, ...]:
    """Build one lateral A-zone polygon flanking the rear of the vehicle body.

    The zone is a rectangle along the vehicle's rear flank (x in [-length, 0],
    |y| in [half_width, half_width + width]) with the outer-rear corner cut so
    a pedestrian rounding that corner is treated as entering mirror view.
    """
    if length <= 0 or width <= 0 or chamfer < 0:
        raise LayoutError("A-zone length/width must be positive, chamfer >= 0")
    if chamfer >= min(length, width):
        raise LayoutError("A-zone chamfer must be smaller than length and width")
    hw, y1 = half_width, half_width + width
    pts = [
        (-length, hw),
        (0.0, hw),
        (0.0, y1 - chamfer),
        (-chamfer, y1),
        (-length, y1),
    ]
    if side == "right":
        pts = [(x, -y) for x, y in reversed(pts)]
    elif side != "left":
        raise ValueError(f"A-zone side must be 'left' or 'right', got {side!r}")
    return tuple(pts)


DEFAULT_A_ZONES = (
    chamfered_a_zone(0.875, "left"),
    chamfered_a_zone(0.875, "right"),
)


@dataclass(frozen=True)
class ZoneLayout:
    """Geometry of the risk partition behind the vehicle.

    band_edges are the outer radii of the distance bands measured from the
    bumper contour; the region past the last edge is outside the zone.
    A-zones are explicit polygons (their side is taken from the sign of the
    mean y of their vertices).
    """

    bumper_half_width: float = 0.875
    band_edges: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0)
    left_line: DivisionLine = DEFAULT_LEFT_LINE
    right_line: DivisionLine = DEFAULT_RIGHT_LINE
    a_zones: tuple[tuple[Vertex, ...], ...] = DEFAULT_A_ZONES
    a_zones_enabled: bool = True
    processing_max_x: float = 6.0

    def __post_init__(self) -> None:
        if self.bumper_half_width <= 0:
            raise LayoutError("bumper_half_width must be positive")
        edges = tuple(float(e) for e in self.band_edges)
        if not edges or any(e <= 0 for e in edges):
            raise LayoutError("band_edges must be positive")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise LayoutError("band_edges must be strictly increasing")
        object.__setattr__(self, "band_edges", edges)
        if self.processing_max_x < edges[-1]:
            raise LayoutError("processing_max_x must reach past the last band edge")
        xi = _line_intersection_x(self.left_line, self.right_line)
        if xi is not None and 0.0 <= xi <= edges[-1]:
            raise LayoutError(
                f"division lines intersect at x={xi:.3f}, inside the zone range"
            )

    @property
    def zone_extent(self) -> float:
        return self.band_edges[-1]

    def a_zone_side(self, index: int) -> str:
        poly = self.a_zones[index]
        mean_y = sum(y for _, y in poly) / len(poly)
        return "left" if mean_y >= 0 else "right"


def _line_intersection_x(a: DivisionLine, b: DivisionLine) -> float | None:
    """x coordinate where the two infinite lines meet, or None when parallel."""
    ax, ay = a.p0
    dax, day = a.p1[0] - ax, a.p1[1] - ay
    bx, by = b.p0
    dbx, dby = b.p1[0] - bx, b.p1[1] - by
    denom = dax * dby - day * dbx
    if abs(denom) < 1e-12:
        return None
    t = ((bx - ax) * dby - (by - ay) * dbx) / denom
    return ax + t * dax


@dataclass(frozen=True)
class ZoneRef:
    """Where a point falls in the partition: a (column, band) cell, an
    A-zone side, or outside the assessed area."""

    kind: str  # "cell" | "a_zone" | "outside"
    column: str | None = None
    band: int | None = None
    side: str | None = None

    @classmethod
    def cell(cls, column: str, band: int) -> "ZoneRef":
        if column not in COLUMNS:
            raise ValueError(f"column must be one of {COLUMNS}, got {column!r}")
        if band < 1:
            raise ValueError(f"band must be >= 1, got {band}")
        return cls(kind="cell", column=column, band=band)

    @classmethod
    def a_zone(cls, side: str) -> "ZoneRef":
        if side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        return cls(kind="a_zone", side=side)

    @classmethod
    def outside(cls) -> "ZoneRef":
        return cls(kind="outside")

    @property
    def label(self) -> str:
        if self.kind == "cell":
            return f"{self.column}{self.band}"
        if self.kind == "a_zone":
            return "AL" if self.side == "left" else "AR"
        return "OUT"

    @classmethod
    def from_label(cls, label: str) -> "ZoneRef":
        text = label.strip().upper()
        if text == "OUT":
            return cls.outside()
        if text == "AL":
            return cls.a_zone("left")
        if text == "AR":
            return cls.a_zone("right")
        if len(text) >= 2 and text[0] in COLUMNS and text[1:].isdigit():
            return cls.cell(text[0], int(text[1:]))
        raise ValueError(f"unrecognized zone label {label!r}")


OUTSIDE = ZoneRef.outside()


def sensor_to_assessment(
    point: tuple[float, float, float], ext: SensorExtrinsics
) -> GroundPoint:
    """Map a sensor-frame point into the assessment frame.

    Composition: yaw rotation about vertical, translation by the sensor
    mounting offsets, then the forward axis is flipped so x grows rearward.
    """
    x, y, z = point
    c, s = math.cos(ext.yaw), math.sin(ext.yaw)
    fx = c * x - s * y + ext.forward_offset
    fy = s * x + c * y + ext.lateral_offset
    fz = z + ext.height
    return GroundPoint(-fx, fy, fz)


def assessment_to_sensor(
    point: GroundPoint, ext: SensorExtrinsics
) -> tuple[float, float, float]:
    """Inverse of sensor_to_assessment."""
    fx, fy, fz = -point.x, point.y, point.z
    vx = fx - ext.forward_offset
    vy = fy - ext.lateral_offset
    vz = fz - ext.height
    c, s = math.cos(-ext.yaw), math.sin(-ext.yaw)
    return (c * vx - s * vy, s * vx + c * vy, vz)


def distance_to_bumper(point: GroundPoint, layout: ZoneLayout) -> float:
    """Euclidean distance from a ground point to the rear-bumper contour.

    The contour is the segment x = 0, |y| <= bumper_half_width, so band
    boundaries are straight behind the bumper and round off at the corners.
    """
    dy = max(0.0, abs(point.y) - layout.bumper_half_width)
    return math.hypot(point.x, dy)


def classify_column(point: GroundPoint, layout: ZoneLayout) -> str:
    """Mirror-visibility column of a point behind the vehicle.

    Strictly past the left division line is L, strictly past the right line
    is R, everything else (including points exactly on a line) is C.
    """
    if layout.left_line.side_of(point.x, point.y) > 0:
        return "L"
    if layout.right_line.side_of(point.x, point.y) < 0:
        return "R"
    return "C"


def classify_band(distance: float, layout: ZoneLayout) -> int | None:
    """Distance band 1..n for a bumper distance, or None outside the zone.

    Band k covers (edge_{k-1}, edge_k]; a boundary distance takes the nearer
    band, and distance 0 is band 1.
    """
    if distance < 0:
        raise ValueError(f"distance must be >= 0, got {distance}")
    edges = layout.band_edges
    if distance > edges[-1]:
        return None
    return bisect_left(edges, distance) + 1 if distance > 0 else 1


def locate(point: GroundPoint, layout: ZoneLayout) -> ZoneRef:
    """Assign an assessment-frame ground point to its risk zone.

    A-zone membership is tested first: the default A-zones flank the vehicle
    body at x <= 0, ahead of the rearward filter that would otherwise discard
    them.  Points at x <= 0 or past processing_max_x, or farther than the
    last band edge from the bumper contour, are outside.
    """
    if layout.a_zones_enabled:
        for i, poly in enumerate(layout.a_zones):
            if point_in_polygon(point.x, point.y, poly):
                return ZoneRef.a_zone(layout.a_zone_side(i))
    if point.x <= 0.0 or point.x >= layout.processing_max_x:
        return OUTSIDE
    band = classify_band(distance_to_bumper(point, layout), layout)
    if band is None:
        return OUTSIDE
    return ZoneRef.cell(classify_column(point, layout), band)


def point_in_polygon(x: float, y: float, polygon: tuple[Vertex, ...]) -> bool:
    """Ray-casting point-in-polygon test (boundary points are not inside)."""
    inside = False
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
    return inside


def _halfplane_polygon(line: DivisionLine, positive_side: bool, reach: float) -> Polygon:
    """A large polygon covering one side of a division line out to `reach`."""
    (x0, y0), (x1, y1) = line.p0, line.p1
    dx, dy = x1 - x0, y1 - y0
    norm = math.hypot(dx, dy)
    ux, uy = dx / norm, dy / norm
    nx, ny = -uy, ux  # left normal of the directed line
    if not positive_side:
        nx, ny = -nx, -ny
    a = (x0 - ux * reach, y0 - uy * reach)
    b = (x0 + ux * reach, y0 + uy * reach)
    return Polygon([a, b, (b[0] + nx * reach, b[1] + ny * reach),
                    (a[0] + nx * reach, a[1] + ny * reach)])


def zone_polygons(
    layout: ZoneLayout, arc_resolution: int = 8
) -> list[tuple[ZoneRef, list[Vertex]]]:
    """Closed polygons approximating every sub-zone of the layout.

    Band boundaries are offsets of the bumper segment: straight behind the
    bumper, circular arcs (arc_resolution segments per quarter turn) around
    the corners.  Cell polygons partition the rearward offset region; the
    A-zones are appended verbatim.  A zone split by an aggressive line
    configuration can yield more than one polygon with the same label.
    """
    if arc_resolution < 1:
        raise ValueError("arc_resolution must be >= 1")
    hw = layout.bumper_half_width
    extent = layout.zone_extent
    reach = (extent + hw) * 4 + 10.0
    bumper = LineString([(0.0, -hw), (0.0, hw)])
    rear = box(0.0, -reach, reach, reach)

    discs = [bumper.buffer(e, quad_segs=arc_resolution) for e in layout.band_edges]
    rings = []
    previous = None
    for disc in discs:
        ring = disc if previous is None else disc.difference(previous)
        rings.append(ring.intersection(rear))
        previous = disc

    left_region = _halfplane_polygon(layout.left_line, True, reach)
    right_region = _halfplane_polygon(layout.right_line, False, reach)

    result: list[tuple[ZoneRef, list[Vertex]]] = []
    for band, ring in enumerate(rings, start=1):
        pieces = (
            ("L", ring.intersection(left_region)),
            ("C", ring.difference(left_region).difference(right_region)),
            ("R", ring.intersection(right_region)),
        )
        for column, geom in pieces:
            for poly in _polygons_of(geom):
                result.append((ZoneRef.cell(column, band), poly))
    if layout.a_zones_enabled:
        for i, poly in enumerate(layout.a_zones):
            result.append((ZoneRef.a_zone(layout.a_zone_side(i)), list(poly)))
    return result


def _polygons_of(geom) -> list[list[Vertex]]:
    """Exterior rings of a shapely geometry, dropping slivers below 1e-9 m2."""
    if geom.is_empty:
        return []
    parts = geom.geoms if geom.geom_type == "MultiPolygon" else [geom]
    out = []
    for part in parts:
        if part.geom_type == "Polygon" and part.area > 1e-9:
            out.append([(float(x), float(y)) for x, y in part.exterior.coords[:-1]])
    return out
