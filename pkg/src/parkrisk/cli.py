"""Single command-line entry point wiring all modules together.

Exit codes: 0 success, 1 validation/usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import yaml

from . import ingest, pipeline, simulator
from .config import AppConfig, dump_config, load_config
from .geometry import zone_polygons
from .ldm import LocalDynamicMap
from .pipeline import REFERENCE_ACCURACIES, frame_to_line, load_truth
from .risk import GazeTarget, risk_matrix
from .server import run_server, zones_payload
from .simulator import NoiseModel, ScenarioSpec


class CliError(Exception):
    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """argparse variant that raises instead of exiting with code 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise CliError(f"{self.prog}: {message}\n{self.format_usage()}", code=1)


def _add_common(parser: argparse.ArgumentParser) -> None:
    # attached to the main parser and every subparser so the flags work in
    # either position; SUPPRESS keeps subparser defaults from clobbering
    # values parsed at the top level
    parser.add_argument("--config", default=argparse.SUPPRESS, help="YAML config file")
    parser.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS, help="override random seed"
    )
    parser.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")
    parser.add_argument(
        "--show-config",
        action="store_true",
        default=argparse.SUPPRESS,
        help="print the resolved config and exit",
    )
    parser.add_argument(
        "--speed-kmh", type=float, default=argparse.SUPPRESS, help="override backing speed"
    )
    parser.add_argument(
        "--reaction-s", type=float, default=argparse.SUPPRESS, help="override reaction time"
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        default=argparse.SUPPRESS,
        help="progress details on stderr",
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="parkrisk", description=__doc__)
    _add_common(parser)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    zones = sub.add_parser("zones", help="emit zone polygons")
    zones.add_argument("--gaze", default=None, choices=[g.value for g in GazeTarget])
    zones.add_argument("--resolution", type=int, default=16)
    zones.add_argument("--format", default="polygons", choices=["polygons"])

    matrix = sub.add_parser("matrix", help="print the risk table")
    matrix.add_argument("--gaze", default="left", choices=[g.value for g in GazeTarget])
    matrix.add_argument("--format", default="table", choices=["table", "lines"])

    sim = sub.add_parser("simulate", help="generate a synthetic dataset")
    sim.add_argument("--frames", type=int, default=100)
    sim.add_argument("--peds", type=int, default=1)
    sim.add_argument("--rate", type=float, default=10.0, help="frame rate, Hz")
    sim.add_argument("--scenario", default="exterior")
    sim.add_argument("--reversing", action="store_true")
    sim.add_argument("--noise", help="YAML noise model; writes a noisy copy too")
    sim.add_argument("--fixed", action="append", metavar="X,Y",
                     help="pin a pedestrian at assessment-frame x,y (repeatable)")
    sim.add_argument("--gaze", default=None, choices=[g.value for g in GazeTarget],
                     help="pin the gaze schedule to one mirror")

    rep = sub.add_parser("replay", help="replay a dataset through the pipeline")
    rep.add_argument("--dataset", required=True)
    rep.add_argument("--speed", type=float, default=None, help="realtime factor")
    rep.add_argument("--fast", action="store_true", help="as fast as possible")
    rep.add_argument("--lenient", action="store_true")

    ing = sub.add_parser("ingest", help="feed raw record files or a socket into a store")
    ing.add_argument("--file", help="line-delimited record file")
    ing.add_argument("--listen", metavar="HOST:PORT", help="accept records over TCP")
    ing.add_argument("--speed", type=float, default=None)
    ing.add_argument("--fast", action="store_true")
    ing.add_argument("--lenient", action="store_true")

    ev = sub.add_parser("evaluate", help="score assessment frames against truth")
    ev.add_argument("--truth", required=True, help="truth.jsonl file")
    ev.add_argument("--frames", required=True, help="assessment frames file")
    ev.add_argument("--json", action="store_true", help="emit the report as JSON")

    srv = sub.add_parser("serve", help="run the HTTP/stream service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--replay", help="dataset directory streamed to subscribers")
    srv.add_argument("--replay-speed", type=float, default=1.0)
    srv.add_argument("--ui", help="serve a static UI bundle from this directory")

    for sub_parser in (zones, matrix, sim, rep, ing, ev, srv):
        _add_common(sub_parser)
    return parser


def _resolved_config(args: argparse.Namespace) -> AppConfig:
    from .risk import KMH_TO_MS

    cfg = load_config(args.config)
    params = cfg.params
    if args.speed_kmh is not None:
        params = replace(params, reverse_speed=args.speed_kmh * KMH_TO_MS)
    if args.reaction_s is not None:
        params = replace(params, reaction_time=args.reaction_s)
    if params is not cfg.params:
        cfg = replace(cfg, params=params)
    return cfg


def _cmd_zones(args, cfg: AppConfig, out) -> int:
    if args.gaze is not None:
        for zone in zones_payload(cfg, GazeTarget(args.gaze), args.resolution):
            out.write(json.dumps(zone, separators=(",", ":")) + "\n")
        return 0
    for zone, vertices in zone_polygons(cfg.layout, args.resolution):
        body = {
            "label": zone.label,
            "risk": None,
            "color": None,
            "vertices": [[x, y] for x, y in vertices],
        }
        out.write(json.dumps(body, separators=(",", ":")) + "\n")
    return 0


def _cmd_matrix(args, cfg: AppConfig, out) -> int:
    table = risk_matrix(cfg.params, cfg.layout)
    if args.format == "lines":
        out.write("\n".join(table.to_lines()) + "\n")
    else:
        out.write(table.render_table(GazeTarget(args.gaze), cfg.params))
    return 0


def _parse_fixed(values: list[str] | None):
    if not values:
        return None
    positions = []
    for item in values:
        try:
            x, y = (float(v) for v in item.split(","))
        except ValueError:
            raise CliError(f"--fixed expects X,Y, got {item!r}") from None
        positions.append((x, y))
    return tuple(positions)


def _cmd_simulate(args, cfg: AppConfig, out) -> int:
    if not args.out:
        raise CliError("simulate requires --out DIR")
    spec = ScenarioSpec(
        seed=args.seed if args.seed is not None else 42,
        frames=args.frames,
        frame_rate_hz=args.rate,
        pedestrians=args.peds,
        reversing=args.reversing,
        scenario=args.scenario,
        fixed_positions=_parse_fixed(args.fixed),
        fixed_gaze=None if args.gaze is None else GazeTarget(args.gaze),
    )
    dataset = simulator.generate(spec, args.out, cfg)
    out.write(f"dataset written to {dataset.directory}\n")
    if args.noise:
        with open(args.noise, "r", encoding="utf-8") as f:
            noise = NoiseModel.from_dict(yaml.safe_load(f))
        noisy = simulator.apply_noise(dataset, noise, spec.seed + 1, args.out + "_noisy")
        out.write(f"noisy copy written to {noisy.directory}\n")
    truths = load_truth(dataset.truth_path)
    out.write(simulator.distribution_report(truths).render_text())
    return 0


def _cmd_replay(args, cfg: AppConfig, out) -> int:
    result = pipeline.run_replay(args.dataset, cfg, lenient=args.lenient)
    lines = "".join(frame_to_line(frame) + "\n" for frame in result.frames)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(lines)
        sys.stderr.write(f"{len(result.frames)} frames -> {args.out}\n")
    else:
        out.write(lines)
    if args.verbose:
        report = result.report
        sys.stderr.write(
            f"zone {report.zone_accuracy:.3f} gaze {report.gaze_accuracy:.3f}"
            f" risk {report.risk_accuracy:.3f}\n"
        )
    return 0


def _cmd_ingest(args, cfg: AppConfig, out) -> int:
    store = LocalDynamicMap()
    if args.listen:
        host, _, port = args.listen.rpartition(":")
        server = ingest.listen(host or "127.0.0.1", int(port), store)
        sys.stderr.write(f"listening on {args.listen}; ctrl-c to stop\n")
        try:
            import time as _time

            while True:
                _time.sleep(0.5)
        except KeyboardInterrupt:
            inserted, errors = server.stop()
            sys.stderr.write(f"stopped: {inserted} inserted, {errors} errors\n")
        return 0
    if not args.file:
        raise CliError("ingest requires --file or --listen")
    speed = None if (args.fast or args.speed is None) else args.speed
    summary = ingest.replay(args.file, store, speed_factor=speed, lenient=args.lenient)
    sys.stderr.write(f"{summary.inserted} inserted, {summary.errors} errors\n")
    snapshot = store.export_snapshot()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(snapshot)
    else:
        out.write(snapshot)
    return 0


def _cmd_evaluate(args, cfg: AppConfig, out) -> int:
    truths = load_truth(args.truth)
    with open(args.frames, "r", encoding="utf-8") as f:
        frames = [pipeline.frame_from_line(line) for line in f if line.strip()]
    report = pipeline.evaluate(frames, truths)
    if args.json:
        out.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")
    else:
        out.write(report.render_text(reference=REFERENCE_ACCURACIES))
    return 0


def _cmd_serve(args, cfg: AppConfig, out) -> int:
    run_server(
        cfg,
        host=args.host,
        port=args.port,
        replay_dir=args.replay,
        replay_speed=args.replay_speed,
        ui_dir=args.ui,
    )
    return 0


_COMMANDS = {
    "zones": _cmd_zones,
    "matrix": _cmd_matrix,
    "simulate": _cmd_simulate,
    "replay": _cmd_replay,
    "ingest": _cmd_ingest,
    "evaluate": _cmd_evaluate,
    "serve": _cmd_serve,
}


def dispatch(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = _build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:  # --help exits here
            return int(e.code or 0)
        for name, default in (
            ("config", None),
            ("seed", None),
            ("out", None),
            ("show_config", False),
            ("speed_kmh", None),
            ("reaction_s", None),
            ("verbose", False),
        ):
            if not hasattr(args, name):
                setattr(args, name, default)
        cfg = _resolved_config(args)
        if args.show_config:
            out.write(dump_config(cfg))
            return 0
        if args.command is None:
            raise CliError(parser.format_usage())
        return _COMMANDS[args.command](args, cfg, out)
    except CliError as e:
        sys.stderr.write(str(e) + ("\n" if not str(e).endswith("\n") else ""))
        return e.code
    except BrokenPipeError:
        return 0  # downstream consumer closed early; not our error
    except OSError as e:
        sys.stderr.write(f"i/o error: {e}\n")
        return 2
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1


def main() -> None:
    code = dispatch()
    try:
        sys.stdout.flush()
    except BrokenPipeError:
        # keep the interpreter's shutdown flush from writing to a dead pipe
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    sys.exit(code)
