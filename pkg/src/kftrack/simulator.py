"""Seeded synthetic ground truth and detector output.

Objects move with constant velocity plus Gaussian acceleration noise on the
center (or, in the ``sinusoidal`` model-mismatch mode, oscillate around their
start point) and bounce off the frame edges. The detector model drops each
object with probability ``1 - p_detect``, jitters the boxes it keeps and adds
Poisson clutter.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, InfeasibleScenario
from .geometry import BBox, ScoredBox

MOTIONS = ("constant-velocity", "sinusoidal")


@dataclass(frozen=True)
class ObjectSpec:
    spawn_frame: int
    lifetime: int
    box: BBox
    velocity: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    accel_sigma: float = 0.0

    def to_dict(self) -> dict:
        return {
            "spawn_frame": self.spawn_frame,
            "lifetime": self.lifetime,
            "box": list(self.box.as_tuple()),
            "velocity": list(self.velocity),
            "accel_sigma": self.accel_sigma,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ObjectSpec":
        try:
            return cls(
                spawn_frame=int(d["spawn_frame"]),
                lifetime=int(d["lifetime"]),
                box=BBox(*map(float, d["box"])),
                velocity=tuple(float(v) for v in d.get("velocity", (0, 0, 0, 0))),
                accel_sigma=float(d.get("accel_sigma", 0.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad object spec {d!r}: {exc}") from exc


@dataclass(frozen=True)
class ScenarioConfig:
    num_frames: int
    frame_size: tuple[float, float]
    objects: tuple[ObjectSpec, ...] = ()
    seed: int = 0
    motion: str = "constant-velocity"
    # frames per oscillation in sinusoidal mode
    sine_period: float = 120.0

    def __post_init__(self):
        if self.num_frames < 0:
            raise ConfigError(f"num_frames must be >= 0, got {self.num_frames}")
        if len(self.frame_size) != 2 or min(self.frame_size) <= 0:
            raise ConfigError(f"frame_size must be two positive numbers, got {self.frame_size}")
        if self.motion not in MOTIONS:
            raise ConfigError(f"motion must be one of {MOTIONS}, got {self.motion!r}")
        if self.sine_period <= 0:
            raise ConfigError("sine_period must be > 0")
        for obj in self.objects:
            if obj.spawn_frame < 0 or obj.lifetime < 0 or obj.accel_sigma < 0 or len(obj.velocity) != 4:
                raise ConfigError(f"invalid object spec {obj}")

    def to_dict(self) -> dict:
        return {
            "num_frames": self.num_frames,
            "frame_size": list(self.frame_size),
            "objects": [o.to_dict() for o in self.objects],
            "seed": self.seed,
            "motion": self.motion,
            "sine_period": self.sine_period,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        try:
            return cls(
                num_frames=int(d["num_frames"]),
                frame_size=tuple(float(v) for v in d["frame_size"]),
                objects=tuple(ObjectSpec.from_dict(o) for o in d.get("objects", [])),
                seed=int(d.get("seed", 0)),
                motion=d.get("motion", "constant-velocity"),
                sine_period=float(d.get("sine_period", 120.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad scenario config: {exc}") from exc


@dataclass(frozen=True)
class DetectorNoiseConfig:
    p_detect: float = 0.7
    loc_sigma: float = 2.0
    size_sigma: float = 2.0
    clutter_rate: float = 0.5
    tp_conf_range: tuple[float, float] = (0.3, 0.99)
    fp_conf_range: tuple[float, float] = (0.05, 0.4)
    clutter_size_range: tuple[float, float] = (16.0, 64.0)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_detect <= 1.0:
            raise ConfigError(f"p_detect must lie in [0, 1], got {self.p_detect}")
        if self.loc_sigma < 0 or self.size_sigma < 0 or self.clutter_rate < 0:
            raise ConfigError("sigmas and clutter_rate must be non-negative")
        for name in ("tp_conf_range", "fp_conf_range"):
            lo, hi = getattr(self, name)
            if not 0.0 <= lo <= hi <= 1.0:
                raise ConfigError(f"{name} must satisfy 0 <= lo <= hi <= 1, got {(lo, hi)}")
        lo, hi = self.clutter_size_range
        if not 1.0 <= lo <= hi:
            raise ConfigError(f"clutter_size_range must satisfy 1 <= lo <= hi, got {(lo, hi)}")

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorNoiseConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown noise config fields: {sorted(unknown)}")
        kw = {k: (tuple(v) if isinstance(v, list) else v) for k, v in d.items()}
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


class GTObject(NamedTuple):
    object_id: int
    box: BBox


GroundTruthStream = list[list[GTObject]]


def _reflect(x: float, v: float, lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        return (lo + hi) / 2.0, 0.0
    if x < lo:
        x, v = min(2 * lo - x, hi), -v
    elif x > hi:
        x, v = max(2 * hi - x, lo), -v
    return x, v


def _trajectory(obj: ObjectSpec, cfg: ScenarioConfig, rng: np.random.Generator, n: int) -> list[BBox]:
    W, H = cfg.frame_size
    cx, cy, w, h = obj.box.as_tuple()
    vx, vy, vw, vh = obj.velocity
    # sinusoidal mode: peak speed equals |velocity|, offset accumulates the noise
    ox = oy = nvx = nvy = 0.0
    out = []
    for t in range(n):
        if cfg.motion == "sinusoidal":
            amp = cfg.sine_period / (2.0 * math.pi)
            phase = 2.0 * math.pi * t / cfg.sine_period
            bx = obj.box.cx + amp * obj.velocity[0] * math.sin(phase) + ox
            by = obj.box.cy + amp * obj.velocity[1] * math.sin(phase) + oy
            bx = min(max(bx, w / 2.0), W - w / 2.0)
            by = min(max(by, h / 2.0), H - h / 2.0)
            out.append(BBox(bx, by, w, h))
        else:
            out.append(BBox(cx, cy, w, h))
        ax, ay = rng.normal(0.0, obj.accel_sigma, 2) if obj.accel_sigma > 0 else (0.0, 0.0)
        w, vw = _reflect(w + vw, vw, 1.0, W)
        h, vh = _reflect(h + vh, vh, 1.0, H)
        if cfg.motion == "sinusoidal":
            nvx += ax
            nvy += ay
            ox += nvx
            oy += nvy
        else:
            vx += ax
            vy += ay
            cx, vx = _reflect(cx + vx, vx, w / 2.0, W - w / 2.0)
            cy, vy = _reflect(cy + vy, vy, h / 2.0, H - h / 2.0)
    return out


def generate_scenario(config: ScenarioConfig) -> GroundTruthStream:
    """Per-frame ground truth; object ``i`` is present in ``[spawn, spawn + lifetime)``."""
    W, H = config.frame_size
    frames: GroundTruthStream = [[] for _ in range(config.num_frames)]
    for i, obj in enumerate(config.objects):
        if obj.box.w > W or obj.box.h > H:
            raise InfeasibleScenario(f"object {i} of size {obj.box.w}x{obj.box.h} exceeds frame {W}x{H}")
        # clip the spawn box into the frame
        start = BBox(
            min(max(obj.box.cx, obj.box.w / 2.0), W - obj.box.w / 2.0),
            min(max(obj.box.cy, obj.box.h / 2.0), H - obj.box.h / 2.0),
            obj.box.w,
            obj.box.h,
        )
        obj = ObjectSpec(obj.spawn_frame, obj.lifetime, start, obj.velocity, obj.accel_sigma)
        n = max(0, min(obj.lifetime, config.num_frames - obj.spawn_frame))
        rng = np.random.default_rng([config.seed, i])
        for t, box in enumerate(_trajectory(obj, config, rng, n)):
            frames[obj.spawn_frame + t].append(GTObject(i, box))
    return frames


def render_detections(
    ground_truth: Sequence[Sequence[GTObject]],
    noise: DetectorNoiseConfig,
    frame_size: tuple[float, float],
) -> list[list[ScoredBox]]:
    """Noisy detector output for a ground-truth stream.

    Per frame, true detections come first in object order, then clutter.
    """
    rng = np.random.default_rng(noise.seed)
    W, H = frame_size
    tp_lo, tp_hi = noise.tp_conf_range
    fp_lo, fp_hi = noise.fp_conf_range
    s_lo, s_hi = noise.clutter_size_range
    out = []
    for objects in ground_truth:
        dets = []
        for obj in objects:
            if rng.random() >= noise.p_detect:
                continue
            jx, jy = rng.normal(0.0, noise.loc_sigma, 2) if noise.loc_sigma > 0 else (0.0, 0.0)
            jw, jh = rng.normal(0.0, noise.size_sigma, 2) if noise.size_sigma > 0 else (0.0, 0.0)
            b = obj.box
            box = BBox(b.cx + jx, b.cy + jy, max(b.w + jw, 1.0), max(b.h + jh, 1.0))
            dets.append(ScoredBox(box, float(rng.uniform(tp_lo, tp_hi))))
        for _ in range(int(rng.poisson(noise.clutter_rate))):
            w = float(min(rng.uniform(s_lo, s_hi), W))
            h = float(min(rng.uniform(s_lo, s_hi), H))
            cx = float(rng.uniform(w / 2.0, W - w / 2.0))
            cy = float(rng.uniform(h / 2.0, H - h / 2.0))
            dets.append(ScoredBox(BBox(cx, cy, w, h), float(rng.uniform(fp_lo, fp_hi))))
        out.append(dets)
    return out


def ground_truth_boxes(ground_truth: Sequence[Sequence[GTObject]]) -> list[list[BBox]]:
    return [[o.box for o in objs] for objs in ground_truth]


STANDARD_FRAME_SIZE = (384.0, 288.0)
STANDARD_NUM_FRAMES = 1500


def standard_scenario(
    seed: int,
    num_frames: int = STANDARD_NUM_FRAMES,
    num_objects: int = 3,
    frame_size: tuple[float, float] = STANDARD_FRAME_SIZE,
    motion: str = "constant-velocity",
) -> ScenarioConfig:
    """Benchmark scene: a few large, slow objects visible for the whole clip.

    Sizes are drawn from U(60, 120) px, speed is 1 px/frame in a random
    direction and the acceleration noise is 0.05 px/frame^2. Layout is derived
    from ``seed``.
    """
    W, H = frame_size
    rng = np.random.default_rng([seed, 0x5CE7E])
    objects = []
    for _ in range(num_objects):
        w, h = rng.uniform(60.0, 120.0, 2)
        w, h = min(w, W), min(h, H)
        cx = rng.uniform(w / 2.0, W - w / 2.0)
        cy = rng.uniform(h / 2.0, H - h / 2.0)
        heading = rng.uniform(0.0, 2.0 * math.pi)
        velocity = (math.cos(heading), math.sin(heading), 0.0, 0.0)
        objects.append(ObjectSpec(0, num_frames, BBox(cx, cy, w, h), velocity, 0.05))
    return ScenarioConfig(num_frames, (W, H), tuple(objects), seed, motion=motion)


def standard_noise(seed: int) -> DetectorNoiseConfig:
    """p_detect 0.7, 0.5 clutter boxes per frame, 2 px location jitter."""
    return DetectorNoiseConfig(
        p_detect=0.7,
        loc_sigma=2.0,
        size_sigma=2.0,
        clutter_rate=0.5,
        tp_conf_range=(0.3, 0.99),
        fp_conf_range=(0.05, 0.4),
        seed=seed,
    )
