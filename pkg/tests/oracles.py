"""Independent reference implementations used only by the tests.

Nothing here imports the code under test beyond plain value types.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def dense_F(dt=1.0):
    F = np.zeros((8, 8))
    for i in range(8):
        F[i, i] = 1.0
    for i in range(4):
        F[i, i + 4] = dt
    return F


def dense_H():
    H = np.zeros((4, 8))
    for i in range(4):
        H[i, i] = 1.0
    return H


def kf_predict(s, P, dt=1.0, q=0.01):
    F = dense_F(dt)
    return F.dot(s), F.dot(P).dot(F.T) + q * np.identity(8)


def kf_update(s, P, z, r=0.0):
    H = dense_H()
    S = H.dot(P).dot(H.T) + r * np.identity(4)
    K = P.dot(H.T).dot(np.linalg.inv(S))
    return s + K.dot(np.asarray(z) - H.dot(s)), (np.identity(8) - K.dot(H)).dot(P)


def eq5(a, b, symmetric=False):
    """Overlap difference score written straight from the formula, on tuples."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    area = 4 * aw * ah - 4 * (bw if symmetric else aw) * bh
    return math.sqrt(abs(area)) + math.sqrt((ax - bx) ** 2 + (ay - by) ** 2)


def nms_exhaustive(boxes, confs, alpha, symmetric=False):
    """The unique subset S, in rank order, where i is in S iff every
    higher-ranked member k of S has score(k, i) >= alpha."""
    order = sorted(range(len(boxes)), key=lambda i: (-confs[i], i))
    rank = {i: r for r, i in enumerate(order)}
    found = []
    for size in range(len(boxes) + 1):
        for subset in itertools.combinations(order, size):
            chosen = set(subset)
            ok = True
            for i in order:
                above = [k for k in chosen if rank[k] < rank[i]]
                keep = all(eq5(boxes[k], boxes[i], symmetric) >= alpha for k in above)
                if keep != (i in chosen):
                    ok = False
                    break
            if ok:
                found.append(sorted(chosen, key=rank.get))
    assert len(found) == 1, found
    return found[0]


def association_exhaustive(track_boxes, det_boxes, det_conf, beta, phi, symmetric=False):
    """Among all maximal one-to-one matchings of eligible pairs, the one whose
    ascending list of (score, track, det) keys is lexicographically smallest.

    Matchings are enumerated as injective partial maps track -> detection.
    """
    score = {}
    for t, tb in enumerate(track_boxes):
        for d, db in enumerate(det_boxes):
            v = eq5(tb, db, symmetric)
            if v < beta and det_conf[d] > phi:
                score[t, d] = v

    matchings = []

    def extend(t, used, chosen):
        if t == len(track_boxes):
            matchings.append(list(chosen))
            return
        extend(t + 1, used, chosen)
        for d in range(len(det_boxes)):
            if (t, d) in score and d not in used:
                chosen.append((score[t, d], t, d))
                extend(t + 1, used | {d}, chosen)
                chosen.pop()

    extend(0, frozenset(), [])
    best = None
    for combo in matchings:
        used_t = {c[1] for c in combo}
        used_d = {c[2] for c in combo}
        if any(t not in used_t and d not in used_d for t, d in score):
            continue  # not maximal
        key = sorted(combo)
        if best is None or key < best:
            best = key
    return [(t, d) for _, t, d in best]


def ap_bruteforce(confs, is_tp, total_gt):
    """Explicit threshold enumeration: at every distinct confidence c count the
    outcomes with confidence >= c, then sum (R_n - R_{n-1}) * P_n exactly."""
    ap = Fraction(0)
    prev_r = Fraction(0)
    for c in sorted(set(confs), reverse=True):
        tp = sum(1 for x, t in zip(confs, is_tp) if x >= c and t)
        fp = sum(1 for x, t in zip(confs, is_tp) if x >= c and not t)
        r = Fraction(tp, total_gt)
        p = Fraction(tp, tp + fp)
        ap += (r - prev_r) * p
        prev_r = r
    return float(ap)


def iou_shapely(a, b):
    from shapely.geometry import box

    pa = box(a[0] - a[2] / 2, a[1] - a[3] / 2, a[0] + a[2] / 2, a[1] + a[3] / 2)
    pb = box(b[0] - b[2] / 2, b[1] - b[3] / 2, b[0] + b[2] / 2, b[1] + b[3] / 2)
    return pa.intersection(pb).area / pa.union(pb).area
