# cython: language_level=3
"""Compiled tracking kernels.

Same contract as ``_pykernels``; written as plain loops over the small dense
matrices so that a tracker step stays well under a millisecond.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, isfinite

cnp.import_array()

NAME = "cython"

cdef double PIVOT_RTOL = 1e-14


def kalman_predict(const double[::1] s, const double[:, ::1] P,
                   const double[:, ::1] F, const double[:, ::1] Q):
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc
    s_out = np.empty(n)
    P_out = np.empty((n, n))
    FP_arr = np.empty((n, n))
    cdef double[::1] so = s_out
    cdef double[:, ::1] Po = P_out
    cdef double[:, ::1] FP = FP_arr

    for i in range(n):
        acc = 0.0
        for k in range(n):
            acc += F[i, k] * s[k]
        so[i] = acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc += F[i, k] * P[k, j]
            FP[i, j] = acc
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(n):
                acc += FP[i, k] * F[j, k]
            Po[i, j] = acc + Q[i, j]
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.5 * (Po[i, j] + Po[j, i])
            Po[i, j] = acc
            Po[j, i] = acc
    return s_out, P_out


cdef bint _cholesky(double[:, ::1] S, double[:, ::1] L, Py_ssize_t m, double jitter):
    """Lower factor of S + jitter*I into L; False if not positive definite."""
    cdef Py_ssize_t i, j, k
    cdef double acc, scale = 0.0
    for i in range(m):
        if S[i, i] + jitter > scale:
            scale = S[i, i] + jitter
        for j in range(m):
            if not isfinite(S[i, j]):
                return False
    for i in range(m):
        for j in range(i + 1):
            acc = S[i, j]
            if i == j:
                acc += jitter
            for k in range(j):
                acc -= L[i, k] * L[j, k]
            if i == j:
                if acc <= PIVOT_RTOL * scale or not isfinite(acc):
                    return False
                L[i, i] = sqrt(acc)
            else:
                L[i, j] = acc / L[j, j]
        for j in range(i + 1, m):
            L[i, j] = 0.0
    return True


def kalman_update(const double[::1] s, const double[:, ::1] P, const double[::1] z,
                  const double[:, ::1] R, double jitter):
    """Update with ``H = [I | 0]``; returns ``None`` if S cannot be factorised."""
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t m = z.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc
    S_arr = np.empty((m, m))
    L_arr = np.empty((m, m))
    Kt_arr = np.empty((m, n))
    cdef double[:, ::1] S = S_arr
    cdef double[:, ::1] L = L_arr
    cdef double[:, ::1] Kt = Kt_arr

    for i in range(m):
        for j in range(m):
            S[i, j] = P[i, j] + R[i, j]
    if not _cholesky(S, L, m, 0.0):
        if not _cholesky(S, L, m, jitter):
            return None

    # Kt = S^-1 * P[:m, :] via forward then backward substitution per column
    for j in range(n):
        for i in range(m):
            acc = P[i, j]
            for k in range(i):
                acc -= L[i, k] * Kt[k, j]
            Kt[i, j] = acc / L[i, i]
        for i in range(m - 1, -1, -1):
            acc = Kt[i, j]
            for k in range(i + 1, m):
                acc -= L[k, i] * Kt[k, j]
            Kt[i, j] = acc / L[i, i]

    s_out = np.empty(n)
    P_out = np.empty((n, n))
    innov_arr = np.empty(m)
    cdef double[::1] so = s_out
    cdef double[:, ::1] Po = P_out
    cdef double[::1] innov = innov_arr
    for i in range(m):
        innov[i] = z[i] - s[i]
    for i in range(n):
        acc = s[i]
        for k in range(m):
            acc += Kt[k, i] * innov[k]
        so[i] = acc
    # P+ = P - K (H P) = P - K P[:m, :]
    for i in range(n):
        for j in range(n):
            acc = P[i, j]
            for k in range(m):
                acc -= Kt[k, i] * P[k, j]
            Po[i, j] = acc
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.5 * (Po[i, j] + Po[j, i])
            Po[i, j] = acc
            Po[j, i] = acc
    return s_out, P_out


cdef inline double _score(const double[:, ::1] A, Py_ssize_t i,
                          const double[:, ::1] B, Py_ssize_t j, bint symmetric) nogil:
    cdef double area, dx, dy
    if symmetric:
        area = fabs(4.0 * A[i, 2] * A[i, 3] - 4.0 * B[j, 2] * B[j, 3])
    else:
        area = fabs(4.0 * A[i, 2] * A[i, 3] - 4.0 * A[i, 2] * B[j, 3])
    dx = A[i, 0] - B[j, 0]
    dy = A[i, 1] - B[j, 1]
    return sqrt(area) + sqrt(dx * dx + dy * dy)


def overlap_matrix(A, B, bint symmetric):
    cdef const double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64).reshape(-1, 4)
    cdef const double[:, ::1] b = np.ascontiguousarray(B, dtype=np.float64).reshape(-1, 4)
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], i, j
    out_arr = np.empty((n, m))
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        for j in range(m):
            out[i, j] = _score(a, i, b, j, symmetric)
    return out_arr


def nms_keep(boxes, double alpha, bint symmetric):
    """Indices kept by greedy suppression of rows already sorted by confidence."""
    cdef const double[:, ::1] b = np.ascontiguousarray(boxes, dtype=np.float64).reshape(-1, 4)
    cdef Py_ssize_t n = b.shape[0], i, k, nkept = 0
    cdef bint keep
    kept_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] kept = kept_arr
    for i in range(n):
        keep = True
        for k in range(nkept):
            if not (_score(b, kept[k], b, i, symmetric) >= alpha):
                keep = False
                break
        if keep:
            kept[nkept] = i
            nkept += 1
    return [int(kept[k]) for k in range(nkept)]


def greedy_match(scores, conf, double beta, double phi):
    """Greedy one-to-one matching by ascending score, ties to lower (row, col)."""
    cdef const double[:, ::1] sc = np.ascontiguousarray(scores, dtype=np.float64)
    cdef const double[::1] cf = np.ascontiguousarray(conf, dtype=np.float64)
    cdef Py_ssize_t n = sc.shape[0], m = sc.shape[1], t, d, bt, bd
    cdef double best
    used_t_arr = np.zeros(n, dtype=np.uint8)
    used_d_arr = np.zeros(m, dtype=np.uint8)
    cdef cnp.uint8_t[::1] used_t = used_t_arr
    cdef cnp.uint8_t[::1] used_d = used_d_arr
    out = []
    while True:
        bt = -1
        bd = -1
        best = 0.0
        for t in range(n):
            if used_t[t]:
                continue
            for d in range(m):
                if used_d[d] or not (cf[d] > phi) or not (sc[t, d] < beta):
                    continue
                if bt < 0 or sc[t, d] < best:
                    best = sc[t, d]
                    bt = t
                    bd = d
        if bt < 0:
            break
        used_t[bt] = 1
        used_d[bd] = 1
        out.append((int(bt), int(bd)))
    return out
