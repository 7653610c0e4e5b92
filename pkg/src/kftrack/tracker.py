"""Frame-by-frame tracking-by-detection.

Each :meth:`Tracker.step` runs, in order: NMS on the raw detections, Kalman
prediction of every live track, greedy association, Kalman update of matched
tracks, expiry of tracks missed ``epsilon`` frames in a row, and spawning of
tracks from confident unmatched detections.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Literal, NamedTuple, Sequence

import numpy as np

from . import _backend
from .errors import ConfigError, NonMonotonicFrame
from .geometry import SCORE_MODES, BBox, ScoredBox, ScoreMode, boxes_array, nms
from .kalman import KalmanState, ModelMatrices, init_state, predict, update

SpawnSuppression = Literal["paper-literal", "overlap-suppressed"]
SPAWN_MODES = ("paper-literal", "overlap-suppressed")


@dataclass(frozen=True)
class TrackerConfig:
    alpha: float
    beta: float
    phi: float
    gamma: float
    epsilon: int
    score_mode: ScoreMode = "literal"
    report_coasting: bool = True
    spawn_suppression: SpawnSuppression = "paper-literal"
    dt: float = 1.0
    q: float = 0.01
    r: float = 0.0
    p0_scale: float = 1.0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        def bad(msg):
            raise ConfigError(msg)

        for name in ("alpha", "beta", "phi", "gamma", "dt", "q", "r", "p0_scale"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                bad(f"{name} must be a finite number, got {value!r}")
        if self.alpha <= 0:
            bad(f"alpha must be > 0, got {self.alpha}")
        if self.beta <= 0:
            bad(f"beta must be > 0, got {self.beta}")
        if not 0.0 <= self.phi <= 1.0:
            bad(f"phi must lie in [0, 1], got {self.phi}")
        if not 0.0 <= self.gamma <= 1.0:
            bad(f"gamma must lie in [0, 1], got {self.gamma}")
        if isinstance(self.epsilon, bool) or not isinstance(self.epsilon, int) or self.epsilon < 1:
            bad(f"epsilon must be an integer >= 1, got {self.epsilon!r}")
        if self.score_mode not in SCORE_MODES:
            bad(f"score_mode must be one of {SCORE_MODES}, got {self.score_mode!r}")
        if self.spawn_suppression not in SPAWN_MODES:
            bad(f"spawn_suppression must be one of {SPAWN_MODES}, got {self.spawn_suppression!r}")
        if self.q < 0 or self.r < 0:
            bad("q and r must be non-negative")
        if self.p0_scale <= 0:
            bad("p0_scale must be > 0")

    def model(self) -> ModelMatrices:
        return ModelMatrices.constant_velocity(dt=self.dt, q=self.q, r=self.r)

    def rescaled(self, factor: float) -> "TrackerConfig":
        """Copy with the pixel thresholds ``alpha`` and ``beta`` multiplied by ``factor``."""
        if factor <= 0:
            raise ConfigError(f"rescale factor must be > 0, got {factor}")
        return replace(self, alpha=self.alpha * factor, beta=self.beta * factor)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrackerConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown tracker config fields: {sorted(unknown)}")
        missing = {"alpha", "beta", "phi", "gamma", "epsilon"} - set(data)
        if missing:
            raise ConfigError(f"missing tracker config fields: {sorted(missing)}")
        return cls(**data)


@dataclass(slots=True)
class Track:
    id: int
    state: KalmanState
    confidence: float
    frames_since_update: int = 0
    age: int = 0

    @property
    def box(self) -> BBox:
        return self.state.to_bbox()


class TrackReport(NamedTuple):
    track_id: int
    box: BBox
    confidence: float
    coasting: bool


@dataclass(frozen=True)
class FrameOutput:
    frame: int
    tracks: tuple[TrackReport, ...] = field(default_factory=tuple)

    def as_detections(self) -> list[ScoredBox]:
        return [ScoredBox(t.box, t.confidence) for t in self.tracks]


class Association(NamedTuple):
    matches: list[tuple[int, int]]
    unmatched_detections: list[int]
    unmatched_tracks: list[int]


def associate(
    predicted: Sequence[Track],
    detections: Sequence[ScoredBox],
    beta: float,
    phi: float,
    score_mode: ScoreMode = "literal",
) -> Association:
    """Match predicted tracks to detections, one to one.

    A pair is eligible when ``overlap_score(track, detection) < beta`` and the
    detection confidence is ``> phi``. Eligible pairs are taken greedily by
    ascending score; ties go to the lower track id, then the lower detection
    index. Matches are ``(track id, detection index)``.
    """
    tracks = sorted(predicted, key=lambda t: t.id)
    if not tracks or not detections:
        return Association([], list(range(len(detections))), [t.id for t in tracks])
    if score_mode not in SCORE_MODES:
        raise ValueError(f"unknown score mode {score_mode!r}")
    k = _backend.kernels
    scores = k.overlap_matrix(
        boxes_array(t.box for t in tracks),
        boxes_array(d.box for d in detections),
        score_mode == "symmetric-area",
    )
    conf = np.fromiter((d.confidence for d in detections), dtype=np.float64, count=len(detections))
    pairs = k.greedy_match(scores, conf, float(beta), float(phi))
    matched_t = {t for t, _ in pairs}
    matched_d = {d for _, d in pairs}
    return Association(
        [(tracks[t].id, d) for t, d in pairs],
        [d for d in range(len(detections)) if d not in matched_d],
        [tracks[t].id for t in range(len(tracks)) if t not in matched_t],
    )


class Tracker:
    """One tracking session (one video). Not thread-safe; call :meth:`step` in frame order."""

    def __init__(self, config: TrackerConfig):
        config.validate()
        self.config = config
        self.model = config.model()
        self.tracks: list[Track] = []
        self.next_id = 0
        self.last_frame: int | None = None
        self.last_association: Association | None = None

    @property
    def spawned(self) -> int:
        return self.next_id

    def step(self, frame_index: int, raw_detections: Sequence[ScoredBox]) -> FrameOutput:
        if self.last_frame is not None and frame_index <= self.last_frame:
            raise NonMonotonicFrame(f"frame {frame_index} does not follow frame {self.last_frame}")
        self.last_frame = frame_index
        cfg = self.config
        model = self.model

        dets = nms(raw_detections, cfg.alpha, cfg.score_mode)

        for track in self.tracks:
            track.state = predict(track.state, model)
            track.age += 1

        assoc = associate(self.tracks, dets, cfg.beta, cfg.phi, cfg.score_mode)
        self.last_association = assoc
        by_id = {t.id: t for t in self.tracks}
        for tid, d in assoc.matches:
            track = by_id[tid]
            det = dets[d]
            track.state = update(track.state, det.box, model)
            track.confidence = det.confidence
            track.frames_since_update = 0

        matched = {tid for tid, _ in assoc.matches}
        survivors = []
        for track in self.tracks:
            if track.id not in matched:
                track.frames_since_update += 1
                # removed on the epsilon-th consecutive miss
                if track.frames_since_update >= cfg.epsilon:
                    continue
            survivors.append(track)
        self.tracks = survivors

        candidates = [dets[d] for d in assoc.unmatched_detections if dets[d].confidence > cfg.gamma]
        if candidates and cfg.spawn_suppression == "overlap-suppressed" and self.tracks:
            scores = _backend.kernels.overlap_matrix(
                boxes_array(t.box for t in self.tracks),
                boxes_array(c.box for c in candidates),
                cfg.score_mode == "symmetric-area",
            )
            far = np.all(scores >= cfg.beta, axis=0)
            candidates = [c for c, ok in zip(candidates, far) if ok]
        for det in candidates:
            self.tracks.append(Track(self.next_id, init_state(det.box, cfg.p0_scale), det.confidence))
            self.next_id += 1

        reports = tuple(
            TrackReport(t.id, t.box, t.confidence, t.frames_since_update > 0)
            for t in self.tracks
            if cfg.report_coasting or t.frames_since_update == 0
        )
        return FrameOutput(frame_index, reports)


def run_sequence(config: TrackerConfig, detection_stream: Iterable[Sequence[ScoredBox]]) -> list[FrameOutput]:
    """Run a fresh session over per-frame detection lists; frame ``k`` is the ``k``-th list."""
    tracker = Tracker(config)
    return [tracker.step(k, dets) for k, dets in enumerate(detection_stream)]
