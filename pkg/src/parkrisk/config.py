"""Application configuration: zone layout, risk parameters, sensor pose.

Config files are YAML with nested sections; every key is optional and
falls back to the built-in defaults.  The resolved configuration can be
dumped back out and reloaded unchanged (round-trip safe).
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from .geometry import DivisionLine, SensorExtrinsics, ZoneLayout, chamfered_a_zone
from .ldm import DEFAULT_DETECTION_STALENESS_MS, DEFAULT_GAZE_STALENESS_MS
from .risk import KMH_TO_MS, RiskLevel, RiskParameters


@dataclass(frozen=True)
class StalenessConfig:
    """Maximum usable record age per stream, milliseconds."""

    gaze_ms: int = DEFAULT_GAZE_STALENESS_MS
    detections_ms: int = DEFAULT_DETECTION_STALENESS_MS


@dataclass(frozen=True)
class AppConfig:
    layout: ZoneLayout
    params: RiskParameters
    extrinsics: SensorExtrinsics
    staleness: StalenessConfig


def default_config() -> AppConfig:
    return AppConfig(
        layout=ZoneLayout(),
        params=RiskParameters(),
        extrinsics=SensorExtrinsics(forward_offset=1.5),
        staleness=StalenessConfig(),
    )


def _line_from(value, fallback: DivisionLine) -> DivisionLine:
    if value is None:
        return fallback
    return DivisionLine(tuple(value["p0"]), tuple(value["p1"]))


def _layout_from(section: dict | None) -> ZoneLayout:
    base = ZoneLayout()
    if not section:
        return base
    half_width = float(section.get("bumper_half_width", base.bumper_half_width))
    if "a_zone_polygons" in section:
        a_zones = tuple(
            tuple((float(x), float(y)) for x, y in poly)
            for poly in section["a_zone_polygons"]
        )
    else:
        shape = section.get("a_zone", {})
        a_zones = tuple(
            chamfered_a_zone(
                half_width,
                side,
                length=float(shape.get("length", 2.0)),
                width=float(shape.get("width", 1.0)),
                chamfer=float(shape.get("chamfer", 0.5)),
            )
            for side in ("left", "right")
        )
    return ZoneLayout(
        bumper_half_width=half_width,
        band_edges=tuple(float(e) for e in section.get("band_edges", base.band_edges)),
        left_line=_line_from(section.get("left_line"), base.left_line),
        right_line=_line_from(section.get("right_line"), base.right_line),
        a_zones=a_zones,
        a_zones_enabled=bool(section.get("a_zones_enabled", base.a_zones_enabled)),
        processing_max_x=float(section.get("processing_max_x", base.processing_max_x)),
    )


def _params_from(section: dict | None) -> RiskParameters:
    base = RiskParameters()
    if not section:
        return base
    if "reverse_speed_kmh" in section:
        speed = float(section["reverse_speed_kmh"]) * KMH_TO_MS
    else:
        speed = float(section.get("reverse_speed_ms", base.reverse_speed))
    return RiskParameters(
        reverse_speed=speed,
        reaction_time=float(section.get("reaction_time_s", base.reaction_time)),
        a_zone_base=RiskLevel.from_wire(section.get("a_zone_base", base.a_zone_base.wire)),
    )


def _extrinsics_from(section: dict | None) -> SensorExtrinsics:
    base = SensorExtrinsics(forward_offset=1.5)
    if not section:
        return base
    return SensorExtrinsics(
        forward_offset=float(section.get("forward_offset", base.forward_offset)),
        lateral_offset=float(section.get("lateral_offset", base.lateral_offset)),
        height=float(section.get("height", base.height)),
        yaw=float(section.get("yaw", base.yaw)),
    )


def config_from_dict(data: dict | None) -> AppConfig:
    data = data or {}
    staleness_sec = data.get("staleness") or {}
    return AppConfig(
        layout=_layout_from(data.get("layout")),
        params=_params_from(data.get("risk")),
        extrinsics=_extrinsics_from(data.get("extrinsics")),
        staleness=StalenessConfig(
            gaze_ms=int(staleness_sec.get("gaze_ms", DEFAULT_GAZE_STALENESS_MS)),
            detections_ms=int(
                staleness_sec.get("detections_ms", DEFAULT_DETECTION_STALENESS_MS)
            ),
        ),
    )


def load_config(path: str | None) -> AppConfig:
    if path is None:
        return default_config()
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    return config_from_dict(data)


def config_to_dict(cfg: AppConfig) -> dict:
    layout, params, ext = cfg.layout, cfg.params, cfg.extrinsics
    return {
        "layout": {
            "bumper_half_width": layout.bumper_half_width,
            "band_edges": list(layout.band_edges),
            "left_line": {"p0": list(layout.left_line.p0), "p1": list(layout.left_line.p1)},
            "right_line": {
                "p0": list(layout.right_line.p0),
                "p1": list(layout.right_line.p1),
            },
            "a_zone_polygons": [[list(v) for v in poly] for poly in layout.a_zones],
            "a_zones_enabled": layout.a_zones_enabled,
            "processing_max_x": layout.processing_max_x,
        },
        "risk": {
            "reverse_speed_ms": params.reverse_speed,
            "reaction_time_s": params.reaction_time,
            "a_zone_base": params.a_zone_base.wire,
        },
        "extrinsics": {
            "forward_offset": ext.forward_offset,
            "lateral_offset": ext.lateral_offset,
            "height": ext.height,
            "yaw": ext.yaw,
        },
        "staleness": {
            "gaze_ms": cfg.staleness.gaze_ms,
            "detections_ms": cfg.staleness.detections_ms,
        },
    }


def dump_config(cfg: AppConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=True)
