import json
import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from kftrack.errors import ParseError
from kftrack.formats import read_detections, read_ground_truth, write_detections, write_ground_truth, write_tracks
from kftrack.geometry import BBox, ScoredBox
from kftrack.simulator import GTObject
from kftrack.tracker import FrameOutput, TrackReport


def write_lines(path, recs):
    path.write_text("".join(json.dumps(r) + "\n" for r in recs))
    return path


coord = st.floats(-1e4, 1e4, allow_nan=False)
size = st.floats(0.01, 1e3, allow_nan=False)
scored = st.builds(lambda cx, cy, w, h, c: ScoredBox(BBox(cx, cy, w, h), c), coord, coord, size, size, st.floats(0, 1))


@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(st.lists(scored, max_size=4), max_size=8))
def test_detection_round_trip(tmp_path, frames):
    p = tmp_path / "d.jsonl"
    write_detections(p, frames, (640, 480))
    header, back = read_detections(p)
    assert header.frame_count == len(frames) and header.frame_size == (640, 480)
    key = lambda d: (-d.confidence, *d.box.as_tuple())
    assert back == [sorted(f, key=key) for f in frames]


def test_ground_truth_round_trip(tmp_path):
    frames = [[GTObject(1, BBox(5, 5, 2, 2)), GTObject(0, BBox(1, 1, 1, 1))], [], [GTObject(None, BBox(3, 3, 3, 3))]]
    p = tmp_path / "gt.jsonl"
    write_ground_truth(p, frames)
    _, back = read_ground_truth(p)
    assert back == [[GTObject(0, BBox(1, 1, 1, 1)), GTObject(1, BBox(5, 5, 2, 2))], [], [GTObject(None, BBox(3, 3, 3, 3))]]


def test_empty_file(tmp_path):
    p = tmp_path / "e.jsonl"
    p.write_text("")
    header, frames = read_detections(p)
    assert frames == [] and header.frame_count == 0
    assert read_detections(p, frame_count=3)[1] == [[], [], []]


def test_implicit_empty_frames(tmp_path):
    p = write_lines(tmp_path / "d.jsonl", [
        {"frame": 0, "cx": 1, "cy": 1, "w": 2, "h": 2, "confidence": 0.5},
        {"frame": 3, "cx": 1, "cy": 1, "w": 2, "h": 2, "confidence": 0.5},
    ])
    _, frames = read_detections(p)
    assert [len(f) for f in frames] == [1, 0, 0, 1]


def test_header_sets_range(tmp_path):
    p = write_lines(tmp_path / "d.jsonl", [
        {"type": "header", "frame_count": 5},
        {"frame": 1, "cx": 1, "cy": 1, "w": 2, "h": 2, "confidence": 0.5},
    ])
    assert len(read_detections(p)[1]) == 5


def test_corner_keys(tmp_path):
    p = write_lines(tmp_path / "d.jsonl", [{"frame": 0, "x1": 10, "y1": 20, "x2": 30, "y2": 60, "confidence": 0.7}])
    assert read_detections(p)[1] == [[ScoredBox(BBox(20, 40, 20, 40), 0.7)]]


def test_line_order_irrelevant(tmp_path):
    rng = random.Random(0)
    recs = [{"frame": rng.randrange(5), "cx": rng.random() * 100, "cy": rng.random() * 100, "w": 5, "h": 5,
             "confidence": rng.choice([0.2, 0.5, 0.9])} for _ in range(40)]
    a = read_detections(write_lines(tmp_path / "a.jsonl", recs))
    rng.shuffle(recs)
    b = read_detections(write_lines(tmp_path / "b.jsonl", recs))
    assert a == b


@pytest.mark.parametrize(
    "recs, line, text",
    [
        ([{"frame": 0, "cx": 1, "cy": 1, "w": 2, "h": 2, "confidence": 0.5},
          {"frame": 0, "cx": 1, "cy": 1, "w": 2, "h": 2, "confidence": 1.2}], 2, "confidence"),
        ([{"frame": 0, "cx": 1, "cy": 1, "w": 0, "h": 2, "confidence": 0.5}], 1, "w"),
        ([{"frame": -1, "cx": 1, "cy": 1, "w": 1, "h": 2, "confidence": 0.5}], 1, "frame"),
        ([{"frame": 0, "cx": 1, "cy": 1, "confidence": 0.5}], 1, "w"),
        ([{"frame": 0, "cx": 1, "cy": 1, "w": 1, "h": 2}], 1, "confidence"),
        ([{"frame": 0, "cx": 1, "cy": 1, "w": 1, "h": 2, "confidence": 0.5}, {"type": "header", "frame_count": 2}], 2, "header"),
        ([{"type": "header", "frame_count": 1}, {"frame": 1, "cx": 1, "cy": 1, "w": 1, "h": 2, "confidence": 0.5}], 2, "range"),
    ],
)
def test_parse_errors_carry_line(tmp_path, recs, line, text):
    p = write_lines(tmp_path / "bad.jsonl", recs)
    with pytest.raises(ParseError) as exc:
        read_detections(p)
    assert exc.value.line == line
    assert f":{line}:" in str(exc.value) and text in str(exc.value)


def test_invalid_json_line(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"frame": 0}\n\n{oops\n')
    with pytest.raises(ParseError) as exc:
        read_ground_truth(p)
    assert exc.value.line == 3


def test_write_tracks(tmp_path):
    outs = [FrameOutput(0, (TrackReport(4, BBox(1, 2, 3, 4), 0.5, False),)), FrameOutput(1, ())]
    p = tmp_path / "t.jsonl"
    write_tracks(p, outs, 2)
    lines = [json.loads(x) for x in p.read_text().splitlines()]
    assert lines[0] == {"type": "header", "frame_count": 2}
    assert lines[1] == {"frame": 0, "track_id": 4, "cx": 1, "cy": 2, "w": 3, "h": 4, "confidence": 0.5, "coasting": False}
    _, dets = read_detections(p)
    assert dets == [[ScoredBox(BBox(1, 2, 3, 4), 0.5)], []]
