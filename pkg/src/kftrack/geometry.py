"""Bounding-box value types, box similarity measures and score-based NMS.

Boxes are stored in center format ``(cx, cy, w, h)`` in pixels. Two measures
are provided: :func:`iou` for evaluation and :func:`overlap_score`, a pixel
dissimilarity used by the tracker (smaller means more alike).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from . import _backend

ScoreMode = Literal["literal", "symmetric-area"]
SCORE_MODES: tuple[str, ...] = ("literal", "symmetric-area")


@dataclass(frozen=True, slots=True)
class BBox:
    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if not (
            math.isfinite(self.cx)
            and math.isfinite(self.cy)
            and math.isfinite(self.w)
            and math.isfinite(self.h)
        ):
            raise ValueError(f"non-finite box {self!r}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box must have positive size, got w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h)

    def corners(self) -> tuple[float, float, float, float]:
        """``(x1, y1, x2, y2)`` corner form."""
        hw, hh = self.w / 2.0, self.h / 2.0
        return (self.cx - hw, self.cy - hh, self.cx + hw, self.cy + hh)

    @classmethod
    def from_corners(cls, x1: float, y1: float, x2: float, y2: float) -> "BBox":
        return cls((x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1)


@dataclass(frozen=True, slots=True)
class ScoredBox:
    box: BBox
    confidence: float

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")


def _check_mode(mode: str) -> bool:
    if mode == "literal":
        return False
    if mode == "symmetric-area":
        return True
    raise ValueError(f"unknown score mode {mode!r}; expected one of {SCORE_MODES}")


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes."""
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    return min(1.0, inter / union)


def overlap_score(a: BBox, b: BBox, mode: ScoreMode = "literal") -> float:
    """Overlap difference score between ``a`` and ``b``.

    ``sqrt(|area term|) + ||center_a - center_b||``. In ``literal`` mode the
    area term is ``4*w_a*h_a - 4*w_a*h_b`` (the width of ``b`` is not used, so
    the score is not symmetric); ``symmetric-area`` uses
    ``4*w_a*h_a - 4*w_b*h_b``.
    """
    if _check_mode(mode):
        area = abs(4.0 * a.w * a.h - 4.0 * b.w * b.h)
    else:
        area = abs(4.0 * a.w * a.h - 4.0 * a.w * b.h)
    dx = a.cx - b.cx
    dy = a.cy - b.cy
    return math.sqrt(area) + math.sqrt(dx * dx + dy * dy)


def boxes_array(boxes: Iterable[BBox]) -> np.ndarray:
    arr = np.array([b.as_tuple() for b in boxes], dtype=np.float64)
    return arr.reshape(-1, 4)


def overlap_matrix(rows: Sequence[BBox], cols: Sequence[BBox], mode: ScoreMode = "literal") -> np.ndarray:
    """Pairwise :func:`overlap_score` with ``rows`` as first argument."""
    return _backend.kernels.overlap_matrix(boxes_array(rows), boxes_array(cols), _check_mode(mode))


def sort_by_confidence(detections: Sequence[ScoredBox]) -> list[ScoredBox]:
    """Descending confidence, stable for ties."""
    return sorted(detections, key=lambda d: -d.confidence)


def nms(detections: Sequence[ScoredBox], alpha: float, mode: ScoreMode = "literal") -> list[ScoredBox]:
    """Greedy suppression on the overlap score.

    Detections are visited by descending confidence. A candidate is kept only
    if ``overlap_score(kept, candidate) >= alpha`` for every box kept so far;
    a lower score marks it as a duplicate of a stronger detection.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    symmetric = _check_mode(mode)
    if not detections:
        return []
    ordered = sort_by_confidence(detections)
    if len(ordered) == 1:
        return ordered
    keep = _backend.kernels.nms_keep(boxes_array(d.box for d in ordered), float(alpha), symmetric)
    return [ordered[i] for i in keep]
