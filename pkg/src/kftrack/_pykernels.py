"""Pure-Python/numpy implementations of the hot tracking kernels.

Mirrors ``_kernels.pyx`` function for function. Box arrays are ``(n, 4)``
float64 in ``(cx, cy, w, h)`` order; ``symmetric`` selects the area term of
the overlap score (``False`` is the literal ``|4*wa*ha - 4*wa*hb|`` form).
"""
from __future__ import annotations

import math

import numpy as np

NAME = "python"

# Cholesky pivots at or below this fraction of the largest diagonal entry are
# treated as a failed factorisation.
PIVOT_RTOL = 1e-14


def _cholesky(S: np.ndarray) -> np.ndarray | None:
    if not np.all(np.isfinite(S)):
        return None
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return None
    scale = max(float(np.max(np.diag(S))), 0.0)
    if np.min(np.diag(L)) ** 2 <= PIVOT_RTOL * scale:
        return None
    return L


def kalman_predict(s, P, F, Q):
    s_new = F @ s
    P_new = F @ P @ F.T + Q
    P_new = 0.5 * (P_new + P_new.T)
    return s_new, P_new


def kalman_update(s, P, z, R, jitter):
    """Update with ``H = [I | 0]``; returns ``None`` if S cannot be factorised."""
    m = z.shape[0]
    n = s.shape[0]
    H = np.zeros((m, n))
    H[:, :m] = np.eye(m)
    S = H @ P @ H.T + R
    L = _cholesky(S)
    if L is None:
        L = _cholesky(S + jitter * np.eye(m))
        if L is None:
            return None
    PHt = P @ H.T
    # K = P H^T S^-1, solved through the factor rather than an explicit inverse
    Kt = np.linalg.solve(L.T, np.linalg.solve(L, PHt.T))
    K = Kt.T
    s_new = s + K @ (z - H @ s)
    P_new = (np.eye(n) - K @ H) @ P
    P_new = 0.5 * (P_new + P_new.T)
    return s_new, P_new


def overlap_matrix(A, B, symmetric):
    A = np.asarray(A, dtype=float).reshape(-1, 4)
    B = np.asarray(B, dtype=float).reshape(-1, 4)
    wa = A[:, 2:3]
    ha = A[:, 3:4]
    wb = B[None, :, 2]
    hb = B[None, :, 3]
    if symmetric:
        area = np.abs(4.0 * wa * ha - 4.0 * wb * hb)
    else:
        area = np.abs(4.0 * wa * ha - 4.0 * wa * hb)
    dx = A[:, 0:1] - B[None, :, 0]
    dy = A[:, 1:2] - B[None, :, 1]
    return np.sqrt(area) + np.sqrt(dx * dx + dy * dy)


def _score(a, b, symmetric):
    if symmetric:
        area = abs(4.0 * a[2] * a[3] - 4.0 * b[2] * b[3])
    else:
        area = abs(4.0 * a[2] * a[3] - 4.0 * a[2] * b[3])
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(area) + math.sqrt(dx * dx + dy * dy)


def nms_keep(boxes, alpha, symmetric):
    """Indices kept by greedy suppression of rows already sorted by confidence."""
    rows = [tuple(r) for r in np.asarray(boxes, dtype=float).reshape(-1, 4).tolist()]
    kept: list[int] = []
    for i, cand in enumerate(rows):
        if all(_score(rows[k], cand, symmetric) >= alpha for k in kept):
            kept.append(i)
    return kept


def greedy_match(scores, conf, beta, phi):
    """Greedy one-to-one matching by ascending score, ties to lower (row, col)."""
    scores = np.asarray(scores, dtype=float)
    n, m = scores.shape
    pairs = [
        (scores[t, d], t, d)
        for t in range(n)
        for d in range(m)
        if scores[t, d] < beta and conf[d] > phi
    ]
    pairs.sort()
    used_t: set[int] = set()
    used_d: set[int] = set()
    out = []
    for _, t, d in pairs:
        if t in used_t or d in used_d:
            continue
        used_t.add(t)
        used_d.add(d)
        out.append((t, d))
    return out
