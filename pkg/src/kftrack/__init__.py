"""Kalman-filter tracking-by-detection for bounding boxes.

The per-frame pipeline lives in :mod:`kftrack.tracker`; evaluation in
:mod:`kftrack.metrics`; the synthetic benchmark in :mod:`kftrack.simulator`.
Hot kernels run compiled when the Cython extension is built, see
:func:`backend`.
"""
from ._backend import active as backend
from .errors import (
    ConfigError,
    DegenerateGroundTruth,
    FrameRangeMismatch,
    InfeasibleScenario,
    NonMonotonicFrame,
    ParseError,
    SingularInnovation,
)
from .geometry import BBox, ScoredBox, iou, nms, overlap_score
from .kalman import KalmanState, ModelMatrices, init_state, predict, update
from .metrics import EvalReport, average_precision, evaluate_run, froc_curve, match_frame, precision_recall_f1
from .presets import load_preset
from .tracker import FrameOutput, Track, Tracker, TrackerConfig, associate, run_sequence

__version__ = "0.1.0"
