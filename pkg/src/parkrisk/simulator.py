"""Synthetic scenario generator with ground-truth labels and detector noise.

Substitutes for a physically recorded dataset: scenes are organized as
segments (one pedestrian placement and one mirror gaze per segment,
mirroring a per-video recording protocol), percepts are emitted noiselessly
in the ingest wire format, and a separate noise pass models imperfect
detectors.  Everything is deterministic given the seed.
"""

from __future__ import annotations

import math
import os
import random
import statistics
from dataclasses import dataclass, replace

import yaml

from .config import AppConfig, config_from_dict, config_to_dict, default_config
from .geometry import (
    GroundPoint,
    ZoneRef,
    assessment_to_sensor,
    distance_to_bumper,
    locate,
    sensor_to_assessment,
)
from .percepts import ExteriorDetection, GazeEvent
from .pipeline import (
    DETECTIONS_FILE,
    GAZE_FILE,
    REFERENCE_ACCURACIES,
    TRUTH_FILE,
    TruthFrame,
    TruthPed,
    run_replay,
    truth_to_line,
)
from .risk import GazeTarget, RiskLevel, assess
from . import ingest
from .tables import render_block_table, scenario_order

MANIFEST_FILE = "manifest.yaml"

# Default mix of generated risk classes (very-high scenes are rare).
DEFAULT_CLASS_MIX = (0.29, 0.37, 0.26, 0.08)

_MIRRORS = (GazeTarget.LEFT, GazeTarget.CENTER, GazeTarget.RIGHT)


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of one synthetic recording."""

    seed: int = 42
    frames: int = 100
    frame_rate_hz: float = 10.0
    pedestrians: int = 1
    region_x: tuple[float, float] = (0.2, 5.8)
    region_y: tuple[float, float] = (-4.0, 4.0)
    boundary_margin: float = 0.02
    segment_frames: tuple[int, int] = (15, 40)
    reversing: bool = False
    scenario: str = "exterior"
    start_ms: int = 1000
    fixed_positions: tuple[tuple[float, float], ...] | None = None
    fixed_gaze: GazeTarget | None = None
    stratify_classes: bool = True
    detection_source: str = "lidar0"
    gaze_source: str = "dms0"

    def __post_init__(self) -> None:
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.frame_rate_hz <= 0:
            raise ValueError("frame_rate_hz must be positive")
        if self.pedestrians < 0:
            raise ValueError("pedestrians must be >= 0")
        for lo, hi in (self.region_x, self.region_y):
            if hi <= lo:
                raise ValueError("region bounds must be increasing")
        if self.region_x[0] < 0:
            raise ValueError("placement region must lie behind the bumper (x > 0)")
        if self.segment_frames[0] < 1 or self.segment_frames[1] < self.segment_frames[0]:
            raise ValueError("segment_frames must be a positive increasing range")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "frames": self.frames,
            "frame_rate_hz": self.frame_rate_hz,
            "pedestrians": self.pedestrians,
            "region_x": list(self.region_x),
            "region_y": list(self.region_y),
            "boundary_margin": self.boundary_margin,
            "segment_frames": list(self.segment_frames),
            "reversing": self.reversing,
            "scenario": self.scenario,
            "start_ms": self.start_ms,
            "fixed_positions": (
                None
                if self.fixed_positions is None
                else [list(p) for p in self.fixed_positions]
            ),
            "fixed_gaze": None if self.fixed_gaze is None else self.fixed_gaze.value,
            "stratify_classes": self.stratify_classes,
            "detection_source": self.detection_source,
            "gaze_source": self.gaze_source,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        fixed = data.get("fixed_positions")
        gaze = data.get("fixed_gaze")
        return cls(
            seed=int(data["seed"]),
            frames=int(data["frames"]),
            frame_rate_hz=float(data["frame_rate_hz"]),
            pedestrians=int(data["pedestrians"]),
            region_x=tuple(data["region_x"]),
            region_y=tuple(data["region_y"]),
            boundary_margin=float(data["boundary_margin"]),
            segment_frames=tuple(data["segment_frames"]),
            reversing=bool(data["reversing"]),
            scenario=data["scenario"],
            start_ms=int(data["start_ms"]),
            fixed_positions=None if fixed is None else tuple(tuple(p) for p in fixed),
            fixed_gaze=None if gaze is None else GazeTarget.from_wire(gaze),
            stratify_classes=bool(data["stratify_classes"]),
            detection_source=data["detection_source"],
            gaze_source=data["gaze_source"],
        )


@dataclass(frozen=True)
class NoiseModel:
    """Detector error model applied to a noiseless dataset.

    zone_accuracy_target, when set, replaces gaussian jitter with a
    calibrated channel: each detection is kept exact with that probability
    and otherwise displaced into a different zone, so the measured zone
    accuracy converges to the target.  gaze_accuracy_target builds a
    uniform-confusion matrix with that diagonal.
    """

    position_sigma: float = 0.0
    detection_drop_rate: float = 0.0
    gaze_confusion: tuple[tuple[float, float, float], ...] | None = None
    zone_accuracy_target: float | None = None
    gaze_accuracy_target: float | None = None

    def __post_init__(self) -> None:
        if self.position_sigma < 0:
            raise ValueError("position_sigma must be >= 0")
        if not 0.0 <= self.detection_drop_rate <= 1.0:
            raise ValueError("detection_drop_rate must be in [0, 1]")
        for target in (self.zone_accuracy_target, self.gaze_accuracy_target):
            if target is not None and not 0.0 <= target <= 1.0:
                raise ValueError("accuracy targets must be in [0, 1]")
        if self.gaze_confusion is not None:
            if len(self.gaze_confusion) != 3:
                raise ValueError("gaze_confusion must be 3x3")
            for row in self.gaze_confusion:
                if len(row) != 3 or any(p < 0 for p in row):
                    raise ValueError("gaze_confusion rows must be 3 non-negative probs")
                if abs(sum(row) - 1.0) > 1e-9:
                    raise ValueError("gaze_confusion rows must sum to 1")

    @classmethod
    def from_targets(cls, zone_accuracy: float, gaze_accuracy: float) -> "NoiseModel":
        return cls(zone_accuracy_target=zone_accuracy, gaze_accuracy_target=gaze_accuracy)

    def resolved_confusion(self) -> tuple[tuple[float, float, float], ...] | None:
        if self.gaze_confusion is not None:
            return self.gaze_confusion
        if self.gaze_accuracy_target is not None:
            a = self.gaze_accuracy_target
            off = (1.0 - a) / 2.0
            return tuple(
                tuple(a if i == j else off for j in range(3)) for i in range(3)
            )
        return None

    def to_dict(self) -> dict:
        return {
            "position_sigma": self.position_sigma,
            "detection_drop_rate": self.detection_drop_rate,
            "gaze_confusion": (
                None
                if self.gaze_confusion is None
                else [list(r) for r in self.gaze_confusion]
            ),
            "zone_accuracy_target": self.zone_accuracy_target,
            "gaze_accuracy_target": self.gaze_accuracy_target,
        }

    @classmethod
    def from_dict(cls, data: dict | None) -> "NoiseModel":
        data = data or {}
        confusion = data.get("gaze_confusion")
        return cls(
            position_sigma=float(data.get("position_sigma", 0.0)),
            detection_drop_rate=float(data.get("detection_drop_rate", 0.0)),
            gaze_confusion=(
                None if confusion is None else tuple(tuple(r) for r in confusion)
            ),
            zone_accuracy_target=data.get("zone_accuracy_target"),
            gaze_accuracy_target=data.get("gaze_accuracy_target"),
        )

    @property
    def is_identity(self) -> bool:
        return (
            self.position_sigma == 0.0
            and self.detection_drop_rate == 0.0
            and self.gaze_confusion is None
            and self.zone_accuracy_target is None
            and self.gaze_accuracy_target is None
        )


@dataclass(frozen=True)
class SimulatedDataset:
    directory: str

    @property
    def detections_path(self) -> str:
        return os.path.join(self.directory, DETECTIONS_FILE)

    @property
    def gaze_path(self) -> str:
        return os.path.join(self.directory, GAZE_FILE)

    @property
    def truth_path(self) -> str:
        return os.path.join(self.directory, TRUTH_FILE)

    @property
    def manifest_path(self) -> str:
        return os.path.join(self.directory, MANIFEST_FILE)

    def load_manifest(self) -> dict:
        with open(self.manifest_path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f)


def _boundary_clearance(point: GroundPoint, cfg: AppConfig) -> float:
    """Distance from a point to the nearest zone boundary of the layout."""
    layout = cfg.layout
    d = distance_to_bumper(point, layout)
    clear = min(abs(d - e) for e in layout.band_edges)
    clear = min(clear, point.x, abs(layout.processing_max_x - point.x))
    for line in (layout.left_line, layout.right_line):
        (x0, y0), (x1, y1) = line.p0, line.p1
        norm = math.hypot(x1 - x0, y1 - y0)
        clear = min(clear, abs(line.side_of(point.x, point.y)) / norm)
    return clear


def _sample_position(
    rng: random.Random, spec: ScenarioSpec, cfg: AppConfig, zone_label: str | None = None
) -> tuple[float, float]:
    """Uniform position in the placement region, margin-clear of boundaries,
    optionally constrained to one zone."""
    for _ in range(20000):
        x = rng.uniform(*spec.region_x)
        y = rng.uniform(*spec.region_y)
        point = GroundPoint(x, y)
        if _boundary_clearance(point, cfg) < spec.boundary_margin:
            continue
        if zone_label is not None and locate(point, cfg.layout).label != zone_label:
            continue
        return (x, y)
    raise ValueError(
        f"could not place a pedestrian{' in ' + zone_label if zone_label else ''};"
        " region or margin too restrictive"
    )


def _class_pairs(cfg: AppConfig) -> dict[int, list[tuple[str, GazeTarget]]]:
    """(zone, gaze) combinations per risk class, cells only (placeable)."""
    pairs: dict[int, list[tuple[str, GazeTarget]]] = {0: [], 1: [], 2: [], 3: []}
    for band in range(1, len(cfg.layout.band_edges) + 1):
        for column in ("L", "C", "R"):
            zone = ZoneRef.cell(column, band)
            for gaze in _MIRRORS:
                level = assess(zone, gaze, cfg.params)
                code = level.class_code
                if code is not None:
                    pairs[code].append((zone.label, gaze))
    return pairs


def generate(
    spec: ScenarioSpec, out_dir: str, cfg: AppConfig | None = None
) -> SimulatedDataset:
    """Write a noiseless labeled dataset (detections, gaze, truth, manifest)."""
    cfg = cfg or default_config()
    if spec.region_x[1] > cfg.layout.processing_max_x + 1.0:
        raise ValueError("placement region extends too far past the processed range")
    os.makedirs(out_dir, exist_ok=True)
    rng = random.Random(spec.seed)
    dt_ms = max(1, round(1000.0 / spec.frame_rate_hz))
    step_m = cfg.params.reverse_speed * dt_ms / 1000.0
    class_pairs = _class_pairs(cfg)
    class_codes = (0, 1, 2, 3)

    det_lines: list[str] = []
    gaze_lines: list[str] = []
    truth_lines: list[str] = []

    positions: list[tuple[float, float]] = []
    gaze: GazeTarget = spec.fixed_gaze or GazeTarget.CENTER
    frames_left = 0

    for k in range(spec.frames):
        if frames_left == 0:
            frames_left = rng.randint(*spec.segment_frames)
            gaze = spec.fixed_gaze or rng.choice(_MIRRORS)
            if spec.reversing and positions:
                pass  # one continuous approach, no repositioning
            elif spec.fixed_positions is not None:
                positions = [tuple(p) for p in spec.fixed_positions]
            else:
                positions = []
                for i in range(spec.pedestrians):
                    if i == 0 and spec.stratify_classes and not spec.reversing:
                        code = rng.choices(class_codes, weights=DEFAULT_CLASS_MIX)[0]
                        zone_label, pair_gaze = rng.choice(class_pairs[code])
                        if spec.fixed_gaze is None:
                            gaze = pair_gaze
                        positions.append(_sample_position(rng, spec, cfg, zone_label))
                    else:
                        positions.append(_sample_position(rng, spec, cfg))
        frames_left -= 1

        t = spec.start_ms + k * dt_ms
        gaze_lines.append(ingest.serialize(spec.gaze_source, GazeEvent(t, gaze, 1.0)))

        truth_peds = []
        for i, (x, y) in enumerate(positions):
            point = GroundPoint(x, y)
            zone = locate(point, cfg.layout)
            level = assess(zone, gaze, cfg.params)
            sx, sy, sz = assessment_to_sensor(point, cfg.extrinsics)
            det_lines.append(
                ingest.serialize(
                    spec.detection_source,
                    ExteriorDetection(t, "pedestrian", sx, sy, sz, 1.0, f"p{i}"),
                )
            )
            truth_peds.append(TruthPed(f"p{i}", x, y, zone.label, level))
        scene = max((p.risk for p in truth_peds), default=RiskLevel.VERY_LOW)
        truth_lines.append(
            truth_to_line(
                TruthFrame(t, spec.scenario, gaze, tuple(truth_peds), scene)
            )
        )

        if spec.reversing:
            positions = [(x - step_m, y) for x, y in positions]

    dataset = SimulatedDataset(out_dir)
    _write_lines(dataset.detections_path, det_lines)
    _write_lines(dataset.gaze_path, gaze_lines)
    _write_lines(dataset.truth_path, truth_lines)
    manifest = {"spec": spec.to_dict(), "config": config_to_dict(cfg), "noise": None}
    with open(dataset.manifest_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(manifest, f, sort_keys=True)
    return dataset


def _write_lines(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(line + "\n")


def apply_noise(
    dataset: SimulatedDataset, noise: NoiseModel, seed: int, out_dir: str
) -> SimulatedDataset:
    """Produce a noisy copy of a dataset; ground truth is untouched."""
    manifest = dataset.load_manifest()
    cfg = config_from_dict(manifest["config"])
    spec = ScenarioSpec.from_dict(manifest["spec"])
    os.makedirs(out_dir, exist_ok=True)
    rng = random.Random(seed)
    confusion = noise.resolved_confusion()

    det_lines: list[str] = []
    with open(dataset.detections_path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            parsed = ingest.parse_line(line, lineno)
            det = parsed.record
            if noise.detection_drop_rate > 0 and rng.random() < noise.detection_drop_rate:
                continue
            if noise.zone_accuracy_target is not None:
                if rng.random() >= noise.zone_accuracy_target:
                    det = _displace_to_other_zone(rng, det, spec, cfg)
            elif noise.position_sigma > 0:
                det = replace(
                    det,
                    x=det.x + rng.gauss(0.0, noise.position_sigma),
                    y=det.y + rng.gauss(0.0, noise.position_sigma),
                )
            det_lines.append(ingest.serialize(parsed.source_id, det))

    gaze_lines: list[str] = []
    with open(dataset.gaze_path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            parsed = ingest.parse_line(line, lineno)
            event = parsed.record
            if confusion is not None and event.target in _MIRRORS:
                row = confusion[_MIRRORS.index(event.target)]
                event = replace(event, target=_pick(rng, row))
            gaze_lines.append(ingest.serialize(parsed.source_id, event))

    noisy = SimulatedDataset(out_dir)
    _write_lines(noisy.detections_path, det_lines)
    _write_lines(noisy.gaze_path, gaze_lines)
    with open(dataset.truth_path, "r", encoding="utf-8") as src:
        truth_text = src.read()
    with open(noisy.truth_path, "w", encoding="utf-8") as dst:
        dst.write(truth_text)
    manifest["noise"] = noise.to_dict()
    with open(noisy.manifest_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(manifest, f, sort_keys=True)
    return noisy


def _pick(rng: random.Random, row: tuple[float, float, float]) -> GazeTarget:
    u = rng.random()
    acc = 0.0
    for target, p in zip(_MIRRORS, row):
        acc += p
        if u < acc:
            return target
    return _MIRRORS[-1]


def _displace_to_other_zone(
    rng: random.Random, det: ExteriorDetection, spec: ScenarioSpec, cfg: AppConfig
) -> ExteriorDetection:
    """Move a detection so its zone differs from the true one (margin-clear)."""
    truth_point = sensor_to_assessment((det.x, det.y, det.z), cfg.extrinsics)
    true_label = locate(GroundPoint(truth_point.x, truth_point.y), cfg.layout).label
    for _ in range(20000):
        x = rng.uniform(*spec.region_x)
        y = rng.uniform(*spec.region_y)
        point = GroundPoint(x, y)
        if _boundary_clearance(point, cfg) < spec.boundary_margin:
            continue
        if locate(point, cfg.layout).label == true_label:
            continue
        sx, sy, sz = assessment_to_sensor(point, cfg.extrinsics)
        return replace(det, x=sx, y=sy, z=sz)
    raise ValueError("could not displace detection into a different zone")


@dataclass
class DistributionReport:
    """Counts of labeled frames per risk class, scenario, and gaze."""

    counts: dict[tuple[str, str, str], int]

    @classmethod
    def from_truth_frames(cls, truths: list[TruthFrame]) -> "DistributionReport":
        counts: dict[tuple[str, str, str], int] = {}
        for frame in truths:
            code = frame.scene_risk.class_code
            label = "no class" if code is None else f"risk {code}"
            key = (label, frame.scenario, frame.gaze.value)
            counts[key] = counts.get(key, 0) + 1
        return cls(counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def render_text(self) -> str:
        groups = scenario_order({s for _, s, _ in self.counts}) or ["exterior"]
        labels = [f"risk {c}" for c in range(4)]
        if any(lbl == "no class" for lbl, _, _ in self.counts):
            labels.append("no class")
        grand = self.total
        rows = []
        for label in labels:
            cells = {}
            row_total = 0
            for (lbl, scenario, gaze), count in self.counts.items():
                if lbl != label:
                    continue
                row_total += count
                cells[(scenario, gaze)] = str(count)
            for group in groups:
                for gaze in ("left", "center", "right"):
                    cells.setdefault((group, gaze), "0")
            pct = 0 if grand == 0 else round(100.0 * row_total / grand)
            rows.append((label, cells, f"{pct}%"))
        footer_cells = {}
        for group in groups:
            group_total = sum(
                count for (_, scenario, _), count in self.counts.items() if scenario == group
            )
            pct = 0 if grand == 0 else round(100.0 * group_total / grand)
            footer_cells[group] = f"{pct}%"
        return render_block_table(
            "Scenario",
            "Gaze",
            groups,
            rows,
            "Total (%)",
            footer=("Total (%)", footer_cells, ""),
        )


def distribution_report(truths: list[TruthFrame]) -> DistributionReport:
    return DistributionReport.from_truth_frames(truths)


@dataclass
class MetricStats:
    mean: float
    stdev: float
    ci95: float
    values: list[float]


@dataclass
class MonteCarloResult:
    trials: int
    zone: MetricStats
    gaze: MetricStats
    risk: MetricStats

    def render_text(self) -> str:
        lines = [f"monte carlo over {self.trials} trials"]
        for name, stats in (("zone", self.zone), ("gaze", self.gaze), ("risk", self.risk)):
            lines.append(
                f"{name:>5} accuracy: mean={stats.mean:.4f}"
                f" stdev={stats.stdev:.4f} ci95=+/-{stats.ci95:.4f}"
            )
        ref = REFERENCE_ACCURACIES
        lines.append(
            f"reference: ped {ref['zone']:.2f}  gaze {ref['gaze']:.2f}"
            f"  DRAS {ref['risk']:.2f}"
        )
        return "\n".join(lines) + "\n"


def _stats(values: list[float]) -> MetricStats:
    mean = statistics.fmean(values)
    stdev = statistics.stdev(values) if len(values) > 1 else 0.0
    ci95 = 1.96 * stdev / math.sqrt(len(values)) if values else 0.0
    return MetricStats(mean, stdev, ci95, values)


def monte_carlo(
    spec: ScenarioSpec,
    noise: NoiseModel,
    trials: int,
    cfg: AppConfig | None = None,
    work_dir: str | None = None,
) -> MonteCarloResult:
    """Repeated generate -> noise -> replay -> evaluate runs.

    Per-trial seeds derive from spec.seed, so the statistics are fully
    determined by (spec, noise, trials).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    import tempfile

    cfg = cfg or default_config()
    master = random.Random(spec.seed)
    zone_vals: list[float] = []
    gaze_vals: list[float] = []
    risk_vals: list[float] = []
    with tempfile.TemporaryDirectory(dir=work_dir) as tmp:
        for trial in range(trials):
            trial_seed = master.randrange(2**31)
            clean_dir = os.path.join(tmp, f"trial{trial}_clean")
            noisy_dir = os.path.join(tmp, f"trial{trial}_noisy")
            clean = generate(replace(spec, seed=trial_seed), clean_dir, cfg)
            noisy = apply_noise(clean, noise, trial_seed + 1, noisy_dir)
            report = run_replay(noisy.directory, cfg).report
            zone_vals.append(report.zone_accuracy)
            gaze_vals.append(report.gaze_accuracy)
            risk_vals.append(report.risk_accuracy)
    return MonteCarloResult(trials, _stats(zone_vals), _stats(gaze_vals), _stats(risk_vals))
