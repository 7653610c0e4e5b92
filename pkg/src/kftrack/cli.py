"""Command line interface: ``kftrack {track,eval,sweep,simulate}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import _backend
from .errors import ConfigError, FrameRangeMismatch, KFTrackError
from .formats import (
    read_detections,
    read_ground_truth,
    write_detections,
    write_ground_truth,
    write_tracks,
)
from .metrics import DEFAULT_FPS, DEFAULT_IOU, Timing, evaluate_run
from .presets import available, get_preset
from .simulator import (
    DetectorNoiseConfig,
    ScenarioConfig,
    generate_scenario,
    ground_truth_boxes,
    render_detections,
    standard_noise,
    standard_scenario,
)
from .sweep import SweepSpec, run_sweep, write_grid_csv
from .tracker import SPAWN_MODES, Tracker, TrackerConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_json(path: str, what: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} {path}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{what} {path}: expected a JSON object")
    return data


def _add_tracker_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("tracker configuration")
    g.add_argument("--preset", default="pp-yolo", help=f"named parameter set ({', '.join(available())}) or .preset path")
    g.add_argument("--config", help="JSON file with TrackerConfig fields, applied over the preset")
    g.add_argument("--alpha", type=float, help="NMS threshold on the overlap score")
    g.add_argument("--beta", type=float, help="association threshold on the overlap score")
    g.add_argument("--epsilon", type=int, help="frames without update before a track is dropped")
    g.add_argument("--phi", type=float, help="minimum detection confidence for a match")
    g.add_argument("--gamma", type=float, help="minimum detection confidence to start a track")
    g.add_argument("--score-mode", choices=["literal", "symmetric-area"])
    g.add_argument("--spawn-suppression", choices=list(SPAWN_MODES))
    g.add_argument("--no-report-coasting", action="store_true", help="only report tracks updated this frame")
    g.add_argument(
        "--rescale",
        action="store_true",
        help="scale alpha/beta of the preset from its reference frame to the input frame_size",
    )


def _tracker_config(args, frame_size) -> TrackerConfig:
    preset = get_preset(args.preset)
    config = preset.config
    if args.rescale:
        if frame_size is None:
            raise ConfigError("--rescale needs a frame_size in the input header")
        config = preset.for_frame(frame_size)
    overrides = {}
    if args.config:
        overrides.update(_load_json(args.config, "tracker config"))
    for name in ("alpha", "beta", "epsilon", "phi", "gamma", "score_mode", "spawn_suppression"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.no_report_coasting:
        overrides["report_coasting"] = False
    unknown = set(overrides) - set(TrackerConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown tracker config fields: {sorted(unknown)}")
    try:
        return replace(config, **overrides)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def cmd_track(args) -> int:
    # reject bad flags before touching any file
    _tracker_config(argparse.Namespace(**{**vars(args), "rescale": False}), None)
    header, frames = read_detections(args.detections, frame_count=args.frame_count)
    config = _tracker_config(args, header.frame_size)
    tracker = Tracker(config)
    outputs = []
    latencies = []
    for k, dets in enumerate(frames):
        t0 = time.perf_counter()
        out = tracker.step(k, dets)
        latencies.append((time.perf_counter() - t0) * 1000.0)
        outputs.append(out)
    write_tracks(args.output, outputs, header.frame_count, header.frame_size)
    if latencies:
        timing = Timing.from_latencies(latencies)
        print(f"{timing.table_row()}  [{_backend.active()} kernels, {len(frames)} frames]", file=sys.stderr)
    else:
        timing = None
        print("no frames processed", file=sys.stderr)
    if args.timing_out:
        Path(args.timing_out).write_text(
            json.dumps({"latencies_ms": latencies, "backend": _backend.active()}) + "\n", encoding="utf-8"
        )
    print(f"{tracker.spawned} tracks over {header.frame_count} frames -> {args.output}", file=sys.stderr)
    return EXIT_OK


def _aligned_streams(pred_path, gt_path):
    gt_header, gt = read_ground_truth(gt_path)
    pred_header, _ = read_detections(pred_path)
    if pred_header.frame_count > gt_header.frame_count:
        raise FrameRangeMismatch(
            f"predictions cover {pred_header.frame_count} frames, ground truth {gt_header.frame_count}"
        )
    _, preds = read_detections(pred_path, frame_count=gt_header.frame_count)
    return gt_header, preds, gt


def cmd_eval(args) -> int:
    gt_header, preds, gt = _aligned_streams(args.predictions, args.ground_truth)
    latencies = None
    if args.latencies:
        latencies = _load_json(args.latencies, "latency file").get("latencies_ms")
    report = evaluate_run(preds, ground_truth_boxes(gt), args.iou, args.fps, latencies)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.pr_csv:
        report.write_pr_csv(args.pr_csv)
    if args.froc_csv:
        report.write_froc_csv(args.froc_csv)
    print(
        f"P={report.precision:.3f} R={report.recall:.3f} F1={report.f1:.3f} AP={report.ap:.3f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec.from_dict(_load_json(args.spec, "sweep spec"))
    gt_header, preds, gt = _aligned_streams(args.detections, args.ground_truth)
    base = _tracker_config(args, gt_header.frame_size)
    best, rows = run_sweep(spec, preds, ground_truth_boxes(gt), base, args.iou, args.fps, args.jobs)
    if args.out:
        write_grid_csv(args.out, rows)
    row = rows[[r.params for r in rows].index((best.alpha, best.beta, best.epsilon, best.phi, best.gamma))]
    result = {"best": best.to_dict(), "ap": row.ap, "f1": row.f1, "cells": len(rows)}
    text = json.dumps(result, indent=2) + "\n"
    if args.best:
        Path(args.best).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def _scenario(arg: str, seed: int | None) -> ScenarioConfig:
    if arg == "standard":
        return standard_scenario(seed or 0)
    cfg = ScenarioConfig.from_dict(_load_json(arg, "scenario config"))
    return cfg if seed is None else replace(cfg, seed=seed)


def _noise(arg: str, seed: int | None) -> DetectorNoiseConfig:
    if arg == "standard":
        return standard_noise(seed or 0)
    cfg = DetectorNoiseConfig.from_dict(_load_json(arg, "noise config"))
    return cfg if seed is None else replace(cfg, seed=seed)


def cmd_simulate(args) -> int:
    scenario = _scenario(args.scenario, args.seed)
    noise = _noise(args.noise, args.seed)
    gt = generate_scenario(scenario)
    dets = render_detections(gt, noise, scenario.frame_size)
    write_ground_truth(args.out_gt, gt, scenario.frame_size)
    write_detections(args.out_det, dets, scenario.frame_size)
    print(
        f"{scenario.num_frames} frames, {sum(map(len, gt))} ground-truth boxes, {sum(map(len, dets))} detections",
        file=sys.stderr,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kftrack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("track", help="run the tracker over a detection file")
    p.add_argument("detections")
    p.add_argument("output")
    p.add_argument("--frame-count", type=int, help="override the frame range of the input")
    p.add_argument("--timing-out", help="write per-frame latencies (ms) as JSON here")
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("predictions")
    p.add_argument("ground_truth")
    p.add_argument("--iou", type=float, default=DEFAULT_IOU, help="IoU needed for a true positive")
    p.add_argument("--fps", type=float, default=DEFAULT_FPS, help="video frame rate for the FROC axis")
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--pr-csv")
    p.add_argument("--froc-csv")
    p.add_argument("--latencies", help="timing JSON written by 'track --timing-out'")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="grid-search tracker thresholds by AP")
    p.add_argument("spec", help="JSON with alpha/beta/epsilon/phi/gamma lists")
    p.add_argument("detections")
    p.add_argument("ground_truth")
    p.add_argument("--out", help="grid table CSV")
    p.add_argument("--best", help="write the best configuration JSON here")
    p.add_argument("--iou", type=float, default=DEFAULT_IOU)
    p.add_argument("--fps", type=float, default=DEFAULT_FPS)
    p.add_argument("--jobs", type=int, default=1)
    _add_tracker_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="write synthetic ground truth and detections")
    p.add_argument("scenario", help="scenario JSON, or 'standard'")
    p.add_argument("noise", help="detector noise JSON, or 'standard'")
    p.add_argument("out_gt")
    p.add_argument("out_det")
    p.add_argument("--seed", type=int, help="override the seeds in both configs")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"kftrack: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (KFTrackError, OSError) as exc:
        print(f"kftrack: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
