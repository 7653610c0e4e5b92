"""Acceptance criteria, one test per criterion.

Each test records a one-line verdict; the terminal summary prints them as
``[PASS|FAIL] ACn ...`` after the run. Select with ``pytest -m acceptance``.
"""
import statistics
import time

import numpy as np
import pytest

from kftrack import _backend
from kftrack.cli import main as cli_main
from kftrack.geometry import BBox, ScoredBox
from kftrack.kalman import KalmanState, ModelMatrices, init_state, predict, update
from kftrack.metrics import ScoredOutcome, average_precision, evaluate_run, f1_score
from kftrack.presets import load_preset
from kftrack.simulator import (
    generate_scenario,
    ground_truth_boxes,
    render_detections,
    standard_noise,
    standard_scenario,
)
from kftrack.tracker import Track, Tracker, TrackerConfig, associate, run_sequence
from oracles import ap_bruteforce, association_exhaustive, kf_predict, kf_update

pytestmark = pytest.mark.acceptance

MODEL = ModelMatrices.constant_velocity()
BACKENDS = sorted(_backend.BACKENDS)


@pytest.fixture
def each_backend():
    previous = _backend.active()

    def iterate():
        for name in BACKENDS:
            yield _backend.use(name).NAME
        _backend.use(previous)

    yield iterate
    _backend.use(previous)


def test_ac1_measurement_snap(record_criterion, each_backend):
    worst = 0.0
    slowest = 0.0
    for _ in each_backend():
        rng = np.random.default_rng(1)
        st = init_state(BBox(500, 500, 50, 50))
        t0 = time.perf_counter()
        for _ in range(1000):
            z = np.concatenate([rng.uniform(0, 1000, 2), rng.uniform(5, 300, 2)])
            st = update(predict(st, MODEL), BBox(*z), MODEL)
            worst = max(worst, float(np.abs(st.s[:4] - z).max()))
        slowest = max(slowest, time.perf_counter() - t0)
    ok = worst <= 1e-9 and slowest < 1.0
    record_criterion("AC1 measurement snap", ok, f"max |Hs - z| = {worst:.2e} (<= 1e-9), slowest backend {slowest:.3f} s (< 1 s)")
    assert ok


def test_ac2_velocity_learning(record_criterion, each_backend):
    s_ref, P_ref = np.array([10.0, 50, 30, 20, 0, 0, 0, 0]), np.eye(8)
    for t in range(1, 11):
        s_ref, P_ref = kf_predict(s_ref, P_ref)
        s_ref, P_ref = kf_update(s_ref, P_ref, [10.0 + 2 * t, 50, 30, 20])
    details = []
    ok = True
    t0 = time.perf_counter()
    for name in each_backend():
        st = init_state(BBox(10, 50, 30, 20))
        for t in range(1, 11):
            st = update(predict(st, MODEL), BBox(10 + 2 * t, 50, 30, 20), MODEL)
        dcx = float(st.s[4])
        gap = abs(dcx - s_ref[4])
        ok &= abs(dcx - 2.0) <= 0.1 and gap <= 1e-9
        details.append(f"{name}: dcx={dcx:.7f} |oracle gap|={gap:.1e}")
    ok &= time.perf_counter() - t0 < 1.0
    record_criterion("AC2 velocity learning", ok, "; ".join(details) + " (target 2.0 +- 5%, gap <= 1e-9)")
    assert ok


def test_ac3_covariance_hygiene(record_criterion, each_backend):
    worst_asym = 0.0
    worst_eig = np.inf
    steps = 0
    for _ in each_backend():
        rng = np.random.default_rng(3)
        st = init_state(BBox(300, 300, 40, 40))
        for k in range(1500):
            if rng.random() < 0.6:
                st = predict(st, MODEL)
            else:
                z = BBox(*rng.uniform(0, 600, 2), *rng.uniform(5, 200, 2))
                st = update(st, z, MODEL)
            P = st.P
            worst_asym = max(worst_asym, float(np.abs(P - P.T).max()))
            worst_eig = min(worst_eig, float(np.linalg.eigvalsh((P + P.T) / 2).min()))
            steps += 1
    ok = worst_asym <= 1e-9 and worst_eig >= -1e-9
    record_criterion(
        "AC3 covariance hygiene", ok, f"{steps} steps: max asymmetry {worst_asym:.1e}, min eigenvalue {worst_eig:.2e}"
    )
    assert ok


def random_instance(rng):
    nt, nd = rng.integers(0, 6, 2)
    # integer grid so equal scores actually occur
    tboxes = [tuple(map(float, (*rng.integers(0, 40, 2), *rng.integers(4, 12, 2)))) for _ in range(nt)]
    dboxes = [tuple(map(float, (*rng.integers(0, 40, 2), *rng.integers(4, 12, 2)))) for _ in range(nd)]
    conf = [float(c) for c in rng.choice([0.1, 0.3, 0.6, 0.9], nd)]
    return tboxes, dboxes, conf


def test_ac4_association_oracle(record_criterion, each_backend):
    mismatches = 0
    total = 0
    for _ in each_backend():
        rng = np.random.default_rng(4)
        for _ in range(500):
            tboxes, dboxes, conf = random_instance(rng)
            beta = float(rng.choice([8.0, 15.0, 30.0]))
            sym = bool(rng.random() < 0.5)
            tracks = [Track(i, init_state(BBox(*b)), 0.5) for i, b in enumerate(tboxes)]
            dets = [ScoredBox(BBox(*b), c) for b, c in zip(dboxes, conf)]
            got = associate(tracks, dets, beta, 0.2, "symmetric-area" if sym else "literal").matches
            want = association_exhaustive(tboxes, dboxes, conf, beta, 0.2, sym)
            mismatches += sorted(got) != sorted(want)
            total += 1
    ok = mismatches == 0
    record_criterion("AC4 association oracle", ok, f"{total - mismatches}/{total} instances equal the exhaustive reference")
    assert ok


def test_ac5_ap_oracle(record_criterion):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(0, 21))
        confs = [float(c) for c in rng.choice(np.round(np.linspace(0.05, 0.95, 10), 2), n)]
        tps = [bool(b) for b in rng.random(n) < 0.5]
        total = sum(tps) + int(rng.integers(0, 4)) or 1
        got = average_precision([ScoredOutcome(c, t) for c, t in zip(confs, tps)], total)
        worst = max(worst, abs(got - float(ap_bruteforce(confs, tps, total))))
    hand = average_precision([ScoredOutcome(0.9, True), ScoredOutcome(0.8, False), ScoredOutcome(0.7, True)], 2)
    hand_exact = hand == 5 / 6
    ok = worst <= 1e-12 and hand_exact
    record_criterion("AC5 AP oracle", ok, f"500 lists, max |AP - brute force| = {worst:.1e}; [TP,FP,TP]/2 GT = {hand!r}")
    assert ok


def test_ac6_f1_fixtures(record_criterion):
    a = f1_score(0.869, 0.740)
    b = f1_score(0.948, 0.948)
    ok = round(a, 3) == 0.799 and round(b, 3) == 0.948
    record_criterion("AC6 F1 fixtures", ok, f"F1(0.869, 0.740) = {a:.4f}, F1(0.948, 0.948) = {b:.4f}")
    assert ok


def test_ac7_tracking_beats_raw_detections(record_criterion):
    t0 = time.perf_counter()
    gains = []
    for seed in range(20):
        scenario = standard_scenario(seed)
        gt = generate_scenario(scenario)
        dets = render_detections(gt, standard_noise(seed), scenario.frame_size)
        boxes = ground_truth_boxes(gt)
        config = load_preset("pp-yolo", scenario.frame_size)
        raw = evaluate_run(dets, boxes)
        tracked = evaluate_run([o.as_detections() for o in run_sequence(config, dets)], boxes)
        gains.append(tracked.f1 - raw.f1)
    elapsed = time.perf_counter() - t0
    mean = statistics.fmean(gains)
    ok = mean >= 0.05 and elapsed < 120
    record_criterion(
        "AC7 tracking improves F1",
        ok,
        f"mean F1 gain {mean:+.4f} over 20 seeds (>= +0.05), per-seed range [{min(gains):+.3f}, {max(gains):+.3f}], "
        f"{elapsed:.1f} s",
    )
    assert ok


def test_ac8_step_latency(record_criterion):
    # 10 well separated objects, each with a matching detection, plus 10 clutter
    # boxes below gamma so the live-track count stays at 10
    cfg = TrackerConfig(alpha=30.0, beta=20.0, phi=0.2, gamma=0.1, epsilon=5)
    rng = np.random.default_rng(8)
    centers = [(100.0 + 100 * (i % 5), 100.0 + 200 * (i // 5)) for i in range(10)]
    frames = []
    for k in range(2100):
        dets = [ScoredBox(BBox(x + k * 0.5 + rng.normal(0, 1), y + rng.normal(0, 1), 30, 30), 0.9) for x, y in centers]
        dets += [ScoredBox(BBox(100.0 + 100 * i + k * 0.5, 700.0, 20, 20), 0.05) for i in range(10)]
        frames.append(dets)
    tracker = Tracker(cfg)
    latencies = []
    live = []
    for k, dets in enumerate(frames):
        t0 = time.perf_counter()
        tracker.step(k, dets)
        dt = (time.perf_counter() - t0) * 1000.0
        live.append(len(tracker.tracks))
        if k >= 100:
            latencies.append(dt)
    median = statistics.median(latencies)
    fps = 1000.0 / statistics.fmean(latencies)
    ok = median <= 1.0 and fps >= 1000 and max(live) == 10
    record_criterion(
        "AC8 step latency",
        ok,
        f"{_backend.active()} kernels: median {median:.4f} ms (<= 1 ms), {fps:.0f} fps (>= 1000), "
        f"{max(live)} live tracks, 20 detections/frame",
    )
    assert ok


def test_ac9_expiry_boundary(record_criterion):
    def visible_misses(epsilon):
        cfg = TrackerConfig(alpha=700.0, beta=295.0, phi=0.17, gamma=0.0575, epsilon=epsilon)
        tr = Tracker(cfg)
        tr.step(0, [ScoredBox(BBox(100, 100, 30, 30), 0.9)])
        survived = 0
        for k in range(1, 40):
            if not tr.step(k, []).tracks:
                break
            survived += 1
        return survived

    one, seventeen = visible_misses(1), visible_misses(17)
    ok = one == 0 and seventeen == 16
    record_criterion("AC9 expiry boundary", ok, f"eps=1 survives {one} misses, eps=17 survives {seventeen} misses")
    assert ok


def test_ac10_end_to_end_determinism(record_criterion, tmp_path):
    digests = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        codes = [
            cli_main(["simulate", "standard", "standard", str(d / "gt.jsonl"), str(d / "det.jsonl"), "--seed", "7"]),
            cli_main(["track", str(d / "det.jsonl"), str(d / "tracks.jsonl"), "--rescale"]),
            cli_main(["eval", str(d / "tracks.jsonl"), str(d / "gt.jsonl"), "--out", str(d / "report.json"),
                      "--pr-csv", str(d / "pr.csv"), "--froc-csv", str(d / "froc.csv")]),
        ]
        assert codes == [0, 0, 0]
        digests.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    same = digests[0] == digests[1]
    record_criterion(
        "AC10 end-to-end determinism", same, f"{len(digests[0])} output files byte-identical across two runs: {same}"
    )
    assert same
