import pytest
import yaml

from parkrisk.config import (
    config_from_dict,
    config_to_dict,
    default_config,
    dump_config,
    load_config,
)
from parkrisk.geometry import GroundPoint, locate
from parkrisk.risk import RiskLevel


def test_defaults_round_trip():
    cfg = default_config()
    again = config_from_dict(config_to_dict(cfg))
    assert dump_config(again) == dump_config(cfg)


def test_load_missing_path_gives_defaults():
    assert dump_config(load_config(None)) == dump_config(default_config())


def test_partial_file_overrides(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "risk": {"reverse_speed_kmh": 4.0, "a_zone_base": "moderate"},
                "layout": {"bumper_half_width": 0.9, "a_zones_enabled": False},
                "staleness": {"gaze_ms": 900},
            }
        ),
        encoding="utf-8",
    )
    cfg = load_config(str(path))
    assert cfg.params.reverse_speed == pytest.approx(4.0 / 3.6)
    assert cfg.params.a_zone_base is RiskLevel.MODERATE
    assert cfg.params.reaction_time == 1.5  # untouched default
    assert cfg.layout.bumper_half_width == 0.9
    assert not cfg.layout.a_zones_enabled
    assert cfg.staleness.gaze_ms == 900
    assert cfg.staleness.detections_ms == 200


def test_a_zone_shape_section(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(
        yaml.safe_dump({"layout": {"a_zone": {"length": 3.0, "width": 0.5, "chamfer": 0.2}}}),
        encoding="utf-8",
    )
    cfg = load_config(str(path))
    assert locate(GroundPoint(-2.5, 1.0), cfg.layout).label == "AL"
    assert locate(GroundPoint(-2.5, 1.6), cfg.layout).label == "OUT"


def test_explicit_polygons_survive_round_trip(tmp_path):
    cfg = default_config()
    dumped = dump_config(cfg)
    path = tmp_path / "cfg.yaml"
    path.write_text(dumped, encoding="utf-8")
    assert dump_config(load_config(str(path))) == dumped
