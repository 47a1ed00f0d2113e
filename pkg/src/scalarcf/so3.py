"""Rotation-matrix primitives: skew maps, exponential/logarithm, Euler factors,
and projection back onto the rotation group.

All rotations are plain 3x3 numpy arrays.  Functions validate their inputs
cheaply and raise ValueError subclasses on contract violations.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

__all__ = [
    "AxisAngle",
    "NotSkewError",
    "DegenerateMatrixError",
    "hat",
    "vee",
    "exp_so3",
    "log_so3",
    "rotation_angle",
    "project_to_so3",
    "rot_x",
    "rot_y",
    "rot_z",
    "euler_zyx",
    "euler_zyx_angles",
    "is_rotation",
]

_EPS = np.finfo(float).eps


class NotSkewError(ValueError):
    """Raised when a matrix expected to be skew-symmetric is not."""


class DegenerateMatrixError(ValueError):
    """Raised when a matrix is too close to singular (or orientation-reversing)
    for a well-defined projection onto SO(3)."""


class AxisAngle(NamedTuple):
    """Axis-angle decomposition of a rotation.  angle is in [0, pi]; the axis is
    unit norm ((1, 0, 0) by convention for the identity rotation)."""

    axis: np.ndarray
    angle: float


def hat(w) -> np.ndarray:
    """Map a 3-vector to the skew-symmetric matrix such that hat(w) @ v == cross(w, v)."""
    w = np.asarray(w, dtype=float)
    if w.shape != (3,):
        raise ValueError(f"expected shape (3,), got {w.shape}")
    return np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )


def vee(M, tol: float = 1e-8) -> np.ndarray:
    """Inverse of :func:`hat`.

    The symmetric part of ``M`` must vanish to within ``tol`` (infinity norm),
    otherwise :class:`NotSkewError` is raised.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise ValueError(f"expected shape (3, 3), got {M.shape}")
    sym = np.max(np.abs(M + M.T))
    if sym > tol:
        raise NotSkewError(f"symmetric part {sym:.3e} exceeds tolerance {tol:.3e}")
    return np.array([M[2, 1], M[0, 2], M[1, 0]])


def exp_so3(w) -> np.ndarray:
    """Rodrigues exponential of a rotation vector.

    Uses the quadratic Taylor expansion below ``|w| = 1e-6`` where the
    sin/cos coefficients lose accuracy.
    """
    w = np.asarray(w, dtype=float)
    th = float(np.linalg.norm(w))
    W = hat(w)
    if th < 1e-6:
        return np.eye(3) + W + 0.5 * (W @ W)
    a = math.sin(th) / th
    b = (1.0 - math.cos(th)) / (th * th)
    return np.eye(3) + a * W + b * (W @ W)


def rotation_angle(R) -> float:
    """Rotation angle in [0, pi] of a rotation matrix (from its trace)."""
    R = np.asarray(R, dtype=float)
    return math.acos(min(1.0, max(-1.0, (float(np.trace(R)) - 1.0) / 2.0)))


def log_so3(R) -> AxisAngle:
    """Principal logarithm of a rotation matrix as an :class:`AxisAngle`.

    Three regimes: the skew part gives the axis away from 0 and pi; below
    an angle of 1e-6 the rotation vector is read directly off the skew part;
    within 1e-6 of pi the axis is recovered from the diagonal of (R + I)/2
    (largest diagonal entry first, signs fixed from the symmetric part).
    """
    R = np.asarray(R, dtype=float)
    th = rotation_angle(R)
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if th < 1e-6:
        # w = 2*sin(th)*axis ~= 2*th*axis
        n = float(np.linalg.norm(w))
        if n == 0.0:
            return AxisAngle(np.array([1.0, 0.0, 0.0]), 0.0)
        return AxisAngle(w / n, th)
    if math.pi - th < 1e-6:
        B = (R + np.eye(3)) / 2.0  # ~= axis outer product at th == pi
        j = int(np.argmax(np.diag(B)))
        axis = B[:, j]
        axis = axis / np.linalg.norm(axis)
        # prefer the sign consistent with the (tiny) skew part when available
        if float(w @ axis) < 0.0:
            axis = -axis
        return AxisAngle(axis, th)
    axis = w / (2.0 * math.sin(th))
    axis = axis / np.linalg.norm(axis)
    return AxisAngle(axis, th)


def project_to_so3(M) -> np.ndarray:
    """Nearest rotation matrix in the Frobenius sense (polar factor via SVD).

    Raises :class:`DegenerateMatrixError` when the smallest singular value is
    below 1e-9 or the input is orientation-reversing.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise ValueError(f"expected shape (3, 3), got {M.shape}")
    U, s, Vt = np.linalg.svd(M)
    if s[-1] < 1e-9:
        raise DegenerateMatrixError(f"smallest singular value {s[-1]:.3e} below 1e-9")
    R = U @ Vt
    if np.linalg.det(R) < 0.0:
        raise DegenerateMatrixError("input is orientation-reversing")
    return R


def rot_x(angle: float) -> np.ndarray:
    """Elementary rotation about e1."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    """Elementary rotation about e2."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    """Elementary rotation about e3."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_zyx(yaw: float, pitch: float, roll: float) -> np.ndarray:
    """Rotation from ZYX (yaw-pitch-roll) Euler angles: R = Rz(yaw) Ry(pitch) Rx(roll)."""
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def euler_zyx_angles(R) -> tuple[float, float, float]:
    """ZYX Euler angles (yaw, pitch, roll) of a rotation matrix.

    At the pitch singularity (|R[2,0]| ~ 1) roll is set to zero and yaw
    absorbs the remaining degree of freedom.
    """
    R = np.asarray(R, dtype=float)
    s = -float(R[2, 0])
    s = min(1.0, max(-1.0, s))
    pitch = math.asin(s)
    if abs(s) > 1.0 - 1e-12:
        return math.atan2(-R[0, 1], R[1, 1]), pitch, 0.0
    yaw = math.atan2(R[1, 0], R[0, 0])
    roll = math.atan2(R[2, 1], R[2, 2])
    return yaw, pitch, roll


def is_rotation(R, tol: float = 1e-9) -> bool:
    """True when R is orthonormal with determinant +1 to within tol."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    if not np.all(np.isfinite(R)):
        return False
    if np.max(np.abs(R.T @ R - np.eye(3))) > tol:
        return False
    return abs(float(np.linalg.det(R)) - 1.0) <= tol
