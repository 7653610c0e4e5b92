"""Constant-velocity Kalman filter over bounding boxes.

State ``s = [cx, cy, w, h, dcx, dcy, dw, dh]`` with covariance ``P``. Only the
first four components are measured (``H = [I | 0]``). With the default
``R = 0`` an update snaps the measured components onto the detection exactly;
velocities are learned through the cross-covariance that ``F`` builds up.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import SingularInnovation
from .geometry import BBox

STATE_DIM = 8
MEAS_DIM = 4
# Added to S only when the plain factorisation fails.
DEFAULT_JITTER = 1e-9
MIN_EXPORT_SIZE = 1.0


def transition_matrix(dt: float = 1.0) -> np.ndarray:
    F = np.eye(STATE_DIM)
    F[:MEAS_DIM, MEAS_DIM:] = dt * np.eye(MEAS_DIM)
    return F


def measurement_matrix() -> np.ndarray:
    return np.hstack([np.eye(MEAS_DIM), np.zeros((MEAS_DIM, MEAS_DIM))])


@dataclass(frozen=True)
class ModelMatrices:
    F: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        shapes = {"F": (8, 8), "H": (4, 8), "Q": (8, 8), "R": (4, 4)}
        for name, shape in shapes.items():
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
        if not np.array_equal(self.H, measurement_matrix()):
            raise ValueError("H must be [I4 | 0]")
        for name in ("Q", "R"):
            arr = getattr(self, name)
            if not np.allclose(arr, arr.T, atol=1e-12):
                raise ValueError(f"{name} must be symmetric")
            if np.min(np.linalg.eigvalsh(arr)) < -1e-12:
                raise ValueError(f"{name} must be positive semidefinite")

    @classmethod
    def constant_velocity(cls, dt: float = 1.0, q: float = 0.01, r: float = 0.0) -> "ModelMatrices":
        """``F`` for step ``dt``, ``Q = q*I8`` and ``R = r*I4``.

        The defaults are the published noise settings (``Q = 0.01*I``, ``R = 0``).
        """
        return cls(
            F=transition_matrix(dt),
            H=measurement_matrix(),
            Q=q * np.eye(STATE_DIM),
            R=r * np.eye(MEAS_DIM),
            dt=float(dt),
        )


@dataclass(frozen=True)
class KalmanState:
    s: np.ndarray
    P: np.ndarray = field(repr=False)

    @property
    def velocity(self) -> np.ndarray:
        return self.s[MEAS_DIM:]

    def to_bbox(self) -> BBox:
        """Box estimate with width and height clamped to at least one pixel."""
        s = self.s
        return BBox(
            float(s[0]),
            float(s[1]),
            max(float(s[2]), MIN_EXPORT_SIZE),
            max(float(s[3]), MIN_EXPORT_SIZE),
        )


def init_state(measurement: BBox, p0_scale: float = 1.0) -> KalmanState:
    if p0_scale <= 0:
        raise ValueError(f"p0_scale must be positive, got {p0_scale}")
    s = np.zeros(STATE_DIM)
    s[:MEAS_DIM] = measurement.as_tuple()
    return KalmanState(s, p0_scale * np.eye(STATE_DIM))


def predict(state: KalmanState, m: ModelMatrices) -> KalmanState:
    """A priori step: ``s' = F s``, ``P' = F P F^T + Q``."""
    s, P = _backend.kernels.kalman_predict(state.s, state.P, m.F, m.Q)
    return KalmanState(s, P)


def update(state: KalmanState, z: BBox, m: ModelMatrices, jitter: float = DEFAULT_JITTER) -> KalmanState:
    """A posteriori step with gain ``K = P H^T (H P H^T + R)^-1``.

    ``P+ = (I - K H) P`` is used as is (no Joseph form); the result is
    resymmetrised. Raises :class:`SingularInnovation` if ``H P H^T + R`` is
    not positive definite even after adding ``jitter * I``.
    """
    zv = np.array(z.as_tuple(), dtype=np.float64)
    out = _backend.kernels.kalman_update(state.s, state.P, zv, m.R, float(jitter))
    if out is None:
        raise SingularInnovation("innovation covariance is not positive definite")
    return KalmanState(out[0], out[1])
