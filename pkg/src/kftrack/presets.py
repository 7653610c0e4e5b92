"""Named tracker parameter sets shipped with the package.

A preset file is JSON with a ``tracker`` block (TrackerConfig fields) and the
``reference_frame_size`` its pixel thresholds are expressed in. Use
:func:`load_preset` with ``frame_size`` to rescale ``alpha`` and ``beta`` by
the ratio of frame diagonals.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .tracker import TrackerConfig

SUFFIX = ".preset"


@dataclass(frozen=True)
class Preset:
    name: str
    config: TrackerConfig
    reference_frame_size: tuple[float, float]
    description: str = ""

    def scale_factor(self, frame_size: tuple[float, float]) -> float:
        return math.hypot(*frame_size) / math.hypot(*self.reference_frame_size)

    def for_frame(self, frame_size: tuple[float, float] | None) -> TrackerConfig:
        if frame_size is None:
            return self.config
        return self.config.rescaled(self.scale_factor(frame_size))


def available() -> list[str]:
    root = resources.files(__package__) / "presets"
    return sorted(p.name[: -len(SUFFIX)] for p in root.iterdir() if p.name.endswith(SUFFIX))


def _parse(text: str, origin: str) -> Preset:
    try:
        data = json.loads(text)
        tracker = TrackerConfig.from_dict(data["tracker"])
        ref = tuple(float(v) for v in data["reference_frame_size"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad preset {origin}: {exc}") from exc
    if len(ref) != 2 or min(ref) <= 0:
        raise ConfigError(f"bad reference_frame_size in {origin}")
    return Preset(data.get("name", origin), tracker, ref, data.get("description", ""))


def get_preset(name: str) -> Preset:
    """Look up a preset by name (``pp-yolo``, ``pp-yolo.preset``) or file path."""
    path = Path(name)
    if path.suffix == SUFFIX and path.is_file():
        return _parse(path.read_text(encoding="utf-8"), str(path))
    stem = name[: -len(SUFFIX)] if name.endswith(SUFFIX) else name
    res = resources.files(__package__) / "presets" / f"{stem}{SUFFIX}"
    if not res.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(available())}")
    return _parse(res.read_text(encoding="utf-8"), stem)


def load_preset(name: str, frame_size: tuple[float, float] | None = None) -> TrackerConfig:
    """Tracker config of preset ``name``, rescaled to ``frame_size`` when given."""
    return get_preset(name).for_frame(frame_size)
