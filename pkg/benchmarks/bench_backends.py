"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_backends.py [--frames N] [--tracks T] [--clutter C] [--json out.json]

Times each hot kernel in isolation and the full tracker step on a synthetic
stream with T live tracks and T + C detections per frame.
"""
from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
import timeit

import numpy as np

from kftrack import _backend
from kftrack.geometry import BBox, ScoredBox
from kftrack.kalman import ModelMatrices
from kftrack.tracker import Tracker, TrackerConfig


def kernel_cases(k, rng, n_boxes):
    m = ModelMatrices.constant_velocity()
    s = rng.normal(0, 50, 8)
    A = rng.normal(size=(8, 8))
    P = A @ A.T + np.eye(8)
    z = rng.normal(0, 50, 4)
    boxes = np.column_stack([rng.uniform(0, 1000, (n_boxes, 2)), rng.uniform(10, 80, (n_boxes, 2))])
    scores = rng.uniform(0, 100, (n_boxes // 2, n_boxes))
    conf = rng.uniform(0, 1, n_boxes)
    return {
        "kalman_predict": lambda: k.kalman_predict(s, P, m.F, m.Q),
        "kalman_update": lambda: k.kalman_update(s, P, z, m.R, 1e-9),
        f"overlap_matrix {n_boxes}x{n_boxes}": lambda: k.overlap_matrix(boxes, boxes, False),
        f"nms_keep {n_boxes}": lambda: k.nms_keep(boxes, 60.0, False),
        f"greedy_match {n_boxes // 2}x{n_boxes}": lambda: k.greedy_match(scores, conf, 50.0, 0.2),
    }


def time_kernel(fn, repeat=5):
    n, _ = timeit.Timer(fn).autorange()
    best = min(timeit.Timer(fn).repeat(repeat, n)) / n
    return best * 1e6


def synthetic_stream(frames, tracks, clutter, seed=0):
    rng = np.random.default_rng(seed)
    centers = [(100.0 + 100 * (i % 8), 100.0 + 150 * (i // 8)) for i in range(tracks)]
    stream = []
    for k in range(frames):
        dets = [ScoredBox(BBox(x + 0.5 * k + rng.normal(0, 1), y + rng.normal(0, 1), 30, 30), 0.9) for x, y in centers]
        dets += [ScoredBox(BBox(*rng.uniform(0, 1200, 2), 20, 20), 0.05) for _ in range(clutter)]
        stream.append(dets)
    return stream


def time_tracker(stream, warmup=50):
    tracker = Tracker(TrackerConfig(alpha=30.0, beta=20.0, phi=0.2, gamma=0.1, epsilon=5))
    lat = []
    for k, dets in enumerate(stream):
        t0 = time.perf_counter()
        tracker.step(k, dets)
        if k >= warmup:
            lat.append((time.perf_counter() - t0) * 1000.0)
    return {"median_ms": statistics.median(lat), "mean_ms": statistics.fmean(lat), "fps": 1000.0 / statistics.fmean(lat)}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=2000)
    ap.add_argument("--tracks", type=int, default=10)
    ap.add_argument("--clutter", type=int, default=10)
    ap.add_argument("--boxes", type=int, default=20, help="box count for the geometry kernels")
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)

    if len(_backend.BACKENDS) < 2:
        print("compiled extension not built; only the python backend is available", file=sys.stderr)
    stream = synthetic_stream(args.frames, args.tracks, args.clutter)
    previous = _backend.active()
    results = {}
    for name in sorted(_backend.BACKENDS):
        k = _backend.use(name)
        rng = np.random.default_rng(0)
        results[name] = {
            "kernels_us": {label: time_kernel(fn) for label, fn in kernel_cases(k, rng, args.boxes).items()},
            "tracker_step": time_tracker(stream),
        }
    _backend.use(previous)

    names = sorted(results)
    labels = list(next(iter(results.values()))["kernels_us"])
    width = max(map(len, labels)) + 2
    print(f"{'kernel (us/call)':<{width}}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label in labels:
        vals = [results[n]["kernels_us"][label] for n in names]
        row = f"{label:<{width}}" + "".join(f"{v:12.2f}" for v in vals)
        if len(names) == 2:
            row += f"{vals[1] / vals[0]:11.1f}x"
        print(row)
    print()
    print(f"tracker step, {args.tracks} tracks, {args.tracks + args.clutter} detections/frame, {args.frames} frames")
    for n in names:
        t = results[n]["tracker_step"]
        print(f"  {n:<8} median {t['median_ms']:.4f} ms  mean {t['mean_ms']:.4f} ms  {t['fps']:.0f} fps")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"args": vars(args), "results": results}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
