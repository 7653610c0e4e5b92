"""Detection evaluation: IoU matching, precision/recall/F1, AP, PR and FROC curves.

A prediction is a true positive when it overlaps a not-yet-matched ground
truth box with IoU of at least ``iou_threshold`` (0.2 by default). AP is the
non-interpolated sum ``sum_n (R_n - R_{n-1}) * P_n`` over every distinct
confidence threshold.
"""
from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from .errors import DegenerateGroundTruth, FrameRangeMismatch
from .geometry import BBox, ScoredBox, iou, sort_by_confidence

DEFAULT_IOU = 0.2
DEFAULT_FPS = 25.0


class ScoredOutcome(NamedTuple):
    confidence: float
    is_tp: bool
    frame: int = 0


class SweepPoint(NamedTuple):
    threshold: float
    tp: int
    fp: int


class PRPoint(NamedTuple):
    threshold: float
    recall: float
    precision: float


class FROCPoint(NamedTuple):
    threshold: float
    fp_per_minute: float
    recall: float


@dataclass(frozen=True)
class Timing:
    mean_ms: float
    sd_ms: float
    fps: float

    @classmethod
    def from_latencies(cls, latencies_ms: Sequence[float]) -> "Timing":
        """Mean and sample standard deviation of per-frame latencies in ms."""
        if not latencies_ms:
            raise ValueError("no latencies to summarise")
        mean = statistics.fmean(latencies_ms)
        sd = statistics.stdev(latencies_ms) if len(latencies_ms) > 1 else 0.0
        fps = 1000.0 / mean if mean > 0 else math.inf
        return cls(mean, sd, fps)

    def table_row(self) -> str:
        return f"Inference Time (SD): {self.mean_ms:.4f} ({self.sd_ms:.4f}) ms  Frame Rate: {self.fps:.1f} fps"


def match_frame(
    predictions: Sequence[ScoredBox],
    ground_truth: Sequence[BBox],
    iou_threshold: float = DEFAULT_IOU,
    frame: int = 0,
) -> tuple[list[ScoredOutcome], int]:
    """Label one frame's predictions as TP/FP and count missed ground truth.

    Predictions are visited by descending confidence. Each takes the unmatched
    ground-truth box with the highest IoU (lowest index on ties) if that IoU
    reaches the threshold, otherwise it is a false positive.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must lie in (0, 1], got {iou_threshold}")
    free = list(range(len(ground_truth)))
    outcomes = []
    for pred in sort_by_confidence(predictions):
        best_j, best_iou = -1, -1.0
        for j in free:
            v = iou(pred.box, ground_truth[j])
            if v > best_iou:
                best_j, best_iou = j, v
        if best_j >= 0 and best_iou >= iou_threshold:
            free.remove(best_j)
            outcomes.append(ScoredOutcome(pred.confidence, True, frame))
        else:
            outcomes.append(ScoredOutcome(pred.confidence, False, frame))
    return outcomes, len(free)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def f1_score(precision: float, recall: float) -> float:
    return _ratio(2.0 * precision * recall, precision + recall)


def precision_recall_f1(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall and F1, with 0 for any zero denominator."""
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    p = _ratio(tp, tp + fp)
    r = _ratio(tp, tp + fn)
    return p, r, f1_score(p, r)


def ordered_outcomes(outcomes: Sequence[ScoredOutcome]) -> list[ScoredOutcome]:
    """Descending confidence; ties put TP before FP, then lower frame, then input order."""
    return sorted(outcomes, key=lambda o: (-o.confidence, not o.is_tp, o.frame))


def threshold_sweep(outcomes: Sequence[ScoredOutcome]) -> list[SweepPoint]:
    """Cumulative TP/FP counts at each distinct confidence, highest first."""
    points: list[SweepPoint] = []
    tp = fp = 0
    ordered = ordered_outcomes(outcomes)
    for i, o in enumerate(ordered):
        if o.is_tp:
            tp += 1
        else:
            fp += 1
        if i + 1 == len(ordered) or ordered[i + 1].confidence != o.confidence:
            points.append(SweepPoint(o.confidence, tp, fp))
    return points


def _check_gt(total_gt: int) -> None:
    if total_gt <= 0:
        raise DegenerateGroundTruth("recall is undefined without ground-truth boxes")


def pr_curve(outcomes: Sequence[ScoredOutcome], total_gt: int) -> list[PRPoint]:
    _check_gt(total_gt)
    return [PRPoint(p.threshold, p.tp / total_gt, _ratio(p.tp, p.tp + p.fp)) for p in threshold_sweep(outcomes)]


def average_precision(outcomes: Sequence[ScoredOutcome], total_gt: int) -> float:
    """Non-interpolated rectangle sum over the threshold sweep.

    Every term is a ratio of integer counts, so the sum is accumulated exactly
    and rounded once; e.g. [TP, FP, TP] over 2 ground-truth boxes gives the
    float nearest 5/6.
    """
    _check_gt(total_gt)
    acc = Fraction(0)
    prev_tp = 0
    for p in threshold_sweep(outcomes):
        if p.tp > prev_tp:
            # (R_n - R_{n-1}) * P_n with the 1/total_gt factored out
            acc += Fraction((p.tp - prev_tp) * p.tp, p.tp + p.fp)
            prev_tp = p.tp
    return float(acc / total_gt)


def froc_curve(
    outcomes: Sequence[ScoredOutcome],
    total_gt: int,
    num_frames: int,
    fps: float = DEFAULT_FPS,
) -> list[FROCPoint]:
    """Recall against false positives per minute of video.

    The first point is a sentinel threshold above every confidence, i.e.
    ``(0, 0)``; the rest follow the threshold sweep, so both coordinates are
    non-decreasing.
    """
    _check_gt(total_gt)
    if num_frames <= 0:
        raise ValueError(f"num_frames must be positive, got {num_frames}")
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    minutes = num_frames / (fps * 60.0)
    top = max((o.confidence for o in outcomes), default=1.0)
    curve = [FROCPoint(math.nextafter(top, math.inf), 0.0, 0.0)]
    for p in threshold_sweep(outcomes):
        curve.append(FROCPoint(p.threshold, p.fp / minutes, p.tp / total_gt))
    return curve


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    ap: float
    tp: int
    fp: int
    fn: int
    num_frames: int
    iou_threshold: float
    fps: float
    pr_curve: list[PRPoint] = field(default_factory=list, repr=False)
    froc_curve: list[FROCPoint] = field(default_factory=list, repr=False)
    timing: Timing | None = None

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.tp, self.fp, self.fn)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "ap": self.ap,
            "counts": {"tp": self.tp, "fp": self.fp, "fn": self.fn},
            "num_frames": self.num_frames,
            "iou_threshold": self.iou_threshold,
            "fps": self.fps,
            "timing": None
            if self.timing is None
            else {"mean_ms": self.timing.mean_ms, "sd_ms": self.timing.sd_ms, "fps": self.timing.fps},
            "pr_curve": [[p.recall, p.precision] for p in self.pr_curve],
            "froc_curve": [[p.fp_per_minute, p.recall] for p in self.froc_curve],
        }

    def to_json(self) -> str:
        """Pretty JSON with one curve point per line."""
        d = self.to_dict()
        curves = {k: d.pop(k) for k in ("pr_curve", "froc_curve")}
        body = json.dumps(d, indent=2)[:-2]
        for name, points in curves.items():
            rows = ",\n".join("    " + json.dumps(p) for p in points)
            body += f',\n  "{name}": [\n{rows}\n  ]' if points else f',\n  "{name}": []'
        return body + "\n}\n"

    def write_pr_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["threshold", "recall", "precision"])
            for p in self.pr_curve:
                w.writerow([repr(p.threshold), repr(p.recall), repr(p.precision)])

    def write_froc_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["threshold", "fp_per_minute", "recall"])
            for p in self.froc_curve:
                w.writerow([repr(p.threshold), repr(p.fp_per_minute), repr(p.recall)])


def evaluate_run(
    per_frame_predictions: Sequence[Sequence[ScoredBox]],
    per_frame_ground_truth: Sequence[Sequence[BBox]],
    iou_threshold: float = DEFAULT_IOU,
    fps: float = DEFAULT_FPS,
    per_frame_latencies: Sequence[float] | None = None,
) -> EvalReport:
    """Evaluate a whole run; frame ``k`` is index ``k`` of both streams.

    The operating point counts every prediction supplied (no extra confidence
    cut); AP and the curves come from the threshold sweep. Latencies are in
    milliseconds.
    """
    if len(per_frame_predictions) != len(per_frame_ground_truth):
        raise FrameRangeMismatch(
            f"{len(per_frame_predictions)} prediction frames vs {len(per_frame_ground_truth)} ground-truth frames"
        )
    outcomes: list[ScoredOutcome] = []
    fn = 0
    total_gt = 0
    for k, (preds, gts) in enumerate(zip(per_frame_predictions, per_frame_ground_truth)):
        frame_outcomes, missed = match_frame(preds, gts, iou_threshold, frame=k)
        outcomes.extend(frame_outcomes)
        fn += missed
        total_gt += len(gts)
    tp = sum(o.is_tp for o in outcomes)
    fp = len(outcomes) - tp
    p, r, f1 = precision_recall_f1(tp, fp, fn)
    timing = Timing.from_latencies(per_frame_latencies) if per_frame_latencies else None
    return EvalReport(
        precision=p,
        recall=r,
        f1=f1,
        ap=average_precision(outcomes, total_gt),
        tp=tp,
        fp=fp,
        fn=fn,
        num_frames=len(per_frame_ground_truth),
        iou_threshold=iou_threshold,
        fps=fps,
        pr_curve=pr_curve(outcomes, total_gt),
        froc_curve=froc_curve(outcomes, total_gt, max(len(per_frame_ground_truth), 1), fps),
        timing=timing,
    )
