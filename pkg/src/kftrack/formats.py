"""Line-delimited JSON detection, ground-truth and track files.

The first line may be a header ``{"type": "header", "frame_count": N,
"frame_size": [W, H]}``. Every other non-blank line is one box record with a
``frame`` index and either center keys ``cx, cy, w, h`` or corner keys
``x1, y1, x2, y2``. Detection records carry ``confidence``; ground truth may
carry ``object_id``; tracker output adds ``track_id`` and ``coasting``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import ParseError
from .geometry import BBox, ScoredBox
from .simulator import GTObject
from .tracker import FrameOutput


@dataclass(frozen=True)
class StreamHeader:
    frame_count: int
    frame_size: tuple[float, float] | None = None

    def to_record(self) -> dict:
        rec = {"type": "header", "frame_count": self.frame_count}
        if self.frame_size is not None:
            rec["frame_size"] = list(self.frame_size)
        return rec


def _number(rec: dict, key: str, line: int, path: str) -> float:
    try:
        v = rec[key]
    except KeyError:
        raise ParseError(f"missing field {key!r}", line, path) from None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ParseError(f"field {key!r} must be a finite number, got {v!r}", line, path)
    return float(v)


def _integer(rec: dict, key: str, line: int, path: str) -> int:
    v = rec.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise ParseError(f"field {key!r} must be an integer, got {v!r}", line, path)
    return v


def _box(rec: dict, line: int, path: str) -> BBox:
    if "cx" in rec:
        vals = [_number(rec, k, line, path) for k in ("cx", "cy", "w", "h")]
    elif "x1" in rec:
        x1, y1, x2, y2 = (_number(rec, k, line, path) for k in ("x1", "y1", "x2", "y2"))
        vals = [(x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1]
    else:
        raise ParseError("record needs cx/cy/w/h or x1/y1/x2/y2", line, path)
    try:
        return BBox(*vals)
    except ValueError as exc:
        raise ParseError(str(exc), line, path) from None


def _records(path: str | Path) -> tuple[StreamHeader | None, list[tuple[int, dict]]]:
    path = str(path)
    header = None
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, text in enumerate(fh, start=1):
            if not text.strip():
                continue
            try:
                rec = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", lineno, path) from None
            if not isinstance(rec, dict):
                raise ParseError("record must be a JSON object", lineno, path)
            if rec.get("type") == "header":
                if header is not None or records:
                    raise ParseError("header must be the first record", lineno, path)
                header = _header(rec, lineno, path)
                continue
            frame = _integer(rec, "frame", lineno, path)
            if frame < 0:
                raise ParseError(f"frame must be >= 0, got {frame}", lineno, path)
            records.append((lineno, rec))
    return header, records


def _header(rec: dict, line: int, path: str) -> StreamHeader:
    count = _integer(rec, "frame_count", line, path)
    if count < 0:
        raise ParseError("frame_count must be >= 0", line, path)
    size = rec.get("frame_size")
    if size is not None:
        if not isinstance(size, list) or len(size) != 2:
            raise ParseError("frame_size must be [width, height]", line, path)
        size = (_number({"w": size[0]}, "w", line, path), _number({"h": size[1]}, "h", line, path))
        if min(size) <= 0:
            raise ParseError("frame_size must be positive", line, path)
    return StreamHeader(count, size)


def _group(header, records, path, build, frame_count):
    if frame_count is None:
        frame_count = header.frame_count if header else max((r["frame"] for _, r in records), default=-1) + 1
    frame_size = header.frame_size if header else None
    frames: list[list] = [[] for _ in range(frame_count)]
    for lineno, rec in records:
        frame = int(rec["frame"])
        if frame >= frame_count:
            raise ParseError(f"frame {frame} outside declared range [0, {frame_count})", lineno, path)
        frames[frame].append(build(rec, lineno))
    return StreamHeader(frame_count, frame_size), frames


def _canonical_detection(d: ScoredBox):
    return (-d.confidence, d.box.cx, d.box.cy, d.box.w, d.box.h)


def read_detections(path: str | Path, frame_count: int | None = None) -> tuple[StreamHeader, list[list[ScoredBox]]]:
    """Detections grouped by frame, sorted within a frame so line order does not matter.

    ``frame_count`` overrides the header; without either, the range ends at the
    last frame seen.
    """
    path = str(path)
    header, records = _records(path)

    def build(rec, lineno):
        conf = _number(rec, "confidence", lineno, path)
        if not 0.0 <= conf <= 1.0:
            raise ParseError(f"confidence must lie in [0, 1], got {conf}", lineno, path)
        return ScoredBox(_box(rec, lineno, path), conf)

    header, frames = _group(header, records, path, build, frame_count)
    for dets in frames:
        dets.sort(key=_canonical_detection)
    return header, frames


def read_ground_truth(path: str | Path, frame_count: int | None = None) -> tuple[StreamHeader, list[list[GTObject]]]:
    path = str(path)
    header, records = _records(path)

    def build(rec, lineno):
        oid = rec.get("object_id")
        if oid is not None:
            oid = _integer(rec, "object_id", lineno, path)
        return GTObject(oid, _box(rec, lineno, path))

    header, frames = _group(header, records, path, build, frame_count)
    for objs in frames:
        objs.sort(key=lambda o: (o.object_id is None, o.object_id or 0, o.box.as_tuple()))
    return header, frames


def _dump(rec: dict) -> str:
    return json.dumps(rec, allow_nan=False) + "\n"


def _write(path: str | Path, header: StreamHeader, lines: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dump(header.to_record()))
        for rec in lines:
            fh.write(_dump(rec))


def _box_fields(box: BBox) -> dict:
    return {"cx": box.cx, "cy": box.cy, "w": box.w, "h": box.h}


def write_detections(path, frames: Sequence[Sequence[ScoredBox]], frame_size=None) -> None:
    def lines() -> Iterator[dict]:
        for k, dets in enumerate(frames):
            for d in dets:
                yield {"frame": k, **_box_fields(d.box), "confidence": d.confidence}

    _write(path, StreamHeader(len(frames), frame_size), lines())


def write_ground_truth(path, frames: Sequence[Sequence[GTObject]], frame_size=None) -> None:
    def lines() -> Iterator[dict]:
        for k, objs in enumerate(frames):
            for o in objs:
                rec = {"frame": k, **_box_fields(o.box)}
                if o.object_id is not None:
                    rec["object_id"] = o.object_id
                yield rec

    _write(path, StreamHeader(len(frames), frame_size), lines())


def write_tracks(path, outputs: Sequence[FrameOutput], frame_count: int, frame_size=None) -> None:
    def lines() -> Iterator[dict]:
        for out in outputs:
            for t in out.tracks:
                yield {
                    "frame": out.frame,
                    "track_id": t.track_id,
                    **_box_fields(t.box),
                    "confidence": t.confidence,
                    "coasting": t.coasting,
                }

    _write(path, StreamHeader(frame_count, frame_size), lines())
