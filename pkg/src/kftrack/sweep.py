"""Exhaustive grid search of the association thresholds, ranked by AP."""
from __future__ import annotations

import csv
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

from .errors import ConfigError
from .geometry import BBox, ScoredBox
from .metrics import DEFAULT_FPS, DEFAULT_IOU, evaluate_run
from .tracker import TrackerConfig, run_sequence

PARAMS = ("alpha", "beta", "epsilon", "phi", "gamma")


@dataclass(frozen=True)
class SweepSpec:
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    epsilon: tuple[int, ...]
    phi: tuple[float, ...]
    gamma: tuple[float, ...]
    objective: str = "ap"

    def __post_init__(self):
        for name in PARAMS:
            if not getattr(self, name):
                raise ConfigError(f"sweep grid {name!r} is empty")
        if self.objective != "ap":
            raise ConfigError(f"only the 'ap' objective is supported, got {self.objective!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        unknown = set(d) - set(PARAMS) - {"objective"}
        if unknown:
            raise ConfigError(f"unknown sweep fields: {sorted(unknown)}")
        try:
            grids = {name: tuple(d[name]) for name in PARAMS}
        except KeyError as exc:
            raise ConfigError(f"sweep spec is missing grid {exc.args[0]!r}") from None
        except TypeError as exc:
            raise ConfigError(f"sweep grids must be lists: {exc}") from None
        return cls(**grids, objective=d.get("objective", "ap"))

    def cells(self) -> list[dict]:
        return [dict(zip(PARAMS, values)) for values in itertools.product(*(getattr(self, p) for p in PARAMS))]

    def __len__(self) -> int:
        n = 1
        for p in PARAMS:
            n *= len(getattr(self, p))
        return n


class SweepRow(NamedTuple):
    alpha: float
    beta: float
    epsilon: int
    phi: float
    gamma: float
    ap: float
    precision: float
    recall: float
    f1: float

    @property
    def params(self) -> tuple:
        return self[:5]


def _evaluate_cell(args) -> SweepRow:
    config, detections, ground_truth, iou_threshold, fps = args
    outputs = run_sequence(config, detections)
    report = evaluate_run([o.as_detections() for o in outputs], ground_truth, iou_threshold, fps)
    return SweepRow(
        config.alpha, config.beta, config.epsilon, config.phi, config.gamma,
        report.ap, report.precision, report.recall, report.f1,
    )


def best_row(rows: Sequence[SweepRow]) -> SweepRow:
    """Highest AP; ties go to higher F1, then the lexicographically smallest parameters."""
    if not rows:
        raise ValueError("no sweep rows")
    return min(rows, key=lambda r: (-r.ap, -r.f1, r.params))


def run_sweep(
    spec: SweepSpec,
    detections: Sequence[Sequence[ScoredBox]],
    ground_truth: Sequence[Sequence[BBox]],
    base: TrackerConfig | None = None,
    iou_threshold: float = DEFAULT_IOU,
    fps: float = DEFAULT_FPS,
    jobs: int = 1,
) -> tuple[TrackerConfig, list[SweepRow]]:
    """Evaluate every grid cell; returns the best config and all rows in grid order.

    Non-swept fields (score mode, spawn policy, ...) come from ``base``.
    """
    if base is None:
        base = TrackerConfig(alpha=1.0, beta=1.0, phi=0.0, gamma=0.0, epsilon=1)
    configs = []
    for cell in spec.cells():
        try:
            configs.append(replace(base, **cell))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid sweep cell {cell}: {exc}") from exc
    tasks = [(c, detections, ground_truth, iou_threshold, fps) for c in configs]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_evaluate_cell, tasks))
    else:
        rows = [_evaluate_cell(t) for t in tasks]
    best = best_row(rows)
    best_config = configs[rows.index(best)]
    return best_config, rows


def write_grid_csv(path, rows: Sequence[SweepRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SweepRow._fields)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
