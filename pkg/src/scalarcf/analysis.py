"""Stability and excitation diagnostics for the scalar-measurement observer.

Covers the error metrics (angle, Lyapunov value), a trailing-window
persistence-of-excitation metric, the misalignment number epsilon for the two
two-scalar sensor configurations, the certified basin angle theta* with its
margin bookkeeping, and closed-form Lyapunov-rate decompositions that expose
how reference/axis misalignment perturbs the nominal decrease.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .so3 import rotation_angle

__all__ = [
    "NoSolutionError",
    "ErrorMetrics",
    "error_metrics",
    "eigvals_sym3",
    "ExcitationWindow",
    "epsilon_two_refs",
    "epsilon_two_axes",
    "solve_theta_star",
    "basin_margin",
    "basin_check",
    "BasinCertificate",
    "certify",
    "LyapunovDecomposition",
    "lyapunov_split_two_refs",
    "lyapunov_split_two_axes",
    "predicted_vdot_common_axes",
    "delta_two_refs_closed",
    "delta_two_axes_closed",
]


class NoSolutionError(ValueError):
    """Raised when no certified basin angle exists for the requested epsilon."""


def _unit(v):
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n < 1e-12:
        raise ValueError("cannot normalize a (near-)zero vector")
    return v / n


@dataclass(frozen=True)
class ErrorMetrics:
    """Summary of the estimation error rotation R_hat R^T."""

    theta_tilde: float  # error angle, rad, in [0, pi]
    V: float  # Lyapunov value tr(I - R_hat R^T) = 2 (1 - cos theta)
    trace_R_tilde: float


def error_metrics(R, R_hat) -> ErrorMetrics:
    """Error metrics of the pair (truth, estimate)."""
    R = np.asarray(R, dtype=float)
    R_hat = np.asarray(R_hat, dtype=float)
    R_tilde = R_hat @ R.T
    tr = float(np.trace(R_tilde))
    return ErrorMetrics(
        theta_tilde=rotation_angle(R_tilde),
        V=3.0 - tr,
        trace_R_tilde=tr,
    )


def eigvals_sym3(M) -> np.ndarray:
    """Eigenvalues of symmetric 3x3 matrices, ascending, by the trigonometric
    closed form.  Accepts a stack shaped (..., 3, 3)."""
    M = np.asarray(M, dtype=float)
    if M.shape[-2:] != (3, 3):
        raise ValueError(f"expected (..., 3, 3), got {M.shape}")
    a00, a01, a02 = M[..., 0, 0], M[..., 0, 1], M[..., 0, 2]
    a11, a12, a22 = M[..., 1, 1], M[..., 1, 2], M[..., 2, 2]
    p1 = a01**2 + a02**2 + a12**2
    q = (a00 + a11 + a22) / 3.0
    b00, b11, b22 = a00 - q, a11 - q, a22 - q
    p2 = b00**2 + b11**2 + b22**2 + 2.0 * p1
    p = np.sqrt(np.maximum(p2, 0.0) / 6.0)
    safe = np.where(p > 0.0, p, 1.0)
    # det((M - q I)/p) / 2, expanded by cofactors
    detB = (
        b00 * (b11 * b22 - a12 * a12)
        - a01 * (a01 * b22 - a12 * a02)
        + a02 * (a01 * a12 - b11 * a02)
    )
    r = np.clip(detB / (2.0 * safe**3), -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    hi = q + 2.0 * p * np.cos(phi)
    lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    mid = 3.0 * q - hi - lo
    out = np.stack([lo, mid, hi], axis=-1)
    return np.where(p2[..., None] > 0.0, out, np.stack([q, q, q], axis=-1))


class ExcitationWindow:
    """Trailing-window persistence-of-excitation metric.

    Feed it time-stamped direction matrices V (3,) or (3, n); it maintains the
    trapezoidal integral of V V^T over the last ``window`` seconds and reports
    mu_hat, the second-smallest eigenvalue of the time-averaged Gram.  One
    sample yields the instantaneous Gram.  mu_hat > 0 means the directions
    explored at least a two-dimensional subspace over the window.
    """

    def __init__(self, window: float):
        if not window > 0.0:
            raise ValueError("window must be positive")
        self.window = float(window)
        self._samples: deque[tuple[float, np.ndarray]] = deque()
        self._acc = np.zeros((3, 3))
        self.mu_hat = 0.0

    @staticmethod
    def _outer(V) -> np.ndarray:
        V = np.asarray(V, dtype=float)
        if V.ndim == 1:
            V = V.reshape(3, 1)
        if V.shape[0] != 3:
            raise ValueError(f"directions must have 3 rows, got shape {V.shape}")
        return V @ V.T

    def update(self, t: float, V) -> float:
        """Append a sample at time t (non-decreasing) and return mu_hat."""
        G = self._outer(V)
        if self._samples:
            t_prev, G_prev = self._samples[-1]
            if t < t_prev:
                raise ValueError("samples must arrive in time order")
            self._acc = self._acc + 0.5 * (t - t_prev) * (G + G_prev)
        self._samples.append((t, G))
        while len(self._samples) > 1 and self._samples[1][0] <= t - self.window:
            t0, G0 = self._samples.popleft()
            t1, G1 = self._samples[0]
            self._acc = self._acc - 0.5 * (t1 - t0) * (G0 + G1)
        t_first = self._samples[0][0]
        span = t - t_first
        avg = self._acc / span if span > 0.0 else G
        self.mu_hat = float(eigvals_sym3(avg)[1])
        return self.mu_hat


def epsilon_two_refs(a, R, b1, b2) -> float:
    """Misalignment number for two references measured along one common axis.

    The sine of the angle between the measurement axis ``a`` and the
    body-frame normal of the reference pair, R^T (b1 x b2)/|b1 x b2|.
    """
    ah = _unit(a)
    n = _unit(np.cross(np.asarray(b1, dtype=float), np.asarray(b2, dtype=float)))
    d = np.asarray(R, dtype=float).T @ n
    return float(np.linalg.norm(np.cross(ah, d)))


def epsilon_two_axes(a1, a2, R, b1) -> float:
    """Misalignment number for one reference measured along two axes.

    The sine of the angle between the axis-plane normal (a1 x a2)/|a1 x a2|
    and the body-frame reference direction R^T b1/|b1|.
    """
    n = _unit(np.cross(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float)))
    d = np.asarray(R, dtype=float).T @ _unit(b1)
    return float(np.linalg.norm(np.cross(n, d)))


def basin_margin(theta: float, epsilon: float) -> float:
    """Stability margin cos(theta/2) cos(theta) - epsilon at error angle theta."""
    return math.cos(theta / 2.0) * math.cos(theta) - epsilon


def solve_theta_star(epsilon: float, tol: float = 1e-10) -> float:
    """Largest error angle in (0, pi/2] with non-negative margin for a given
    misalignment bound.

    Solves cos(theta/2) cos(theta) = epsilon by bisection (the left side is
    strictly decreasing from 1 to 0 on [0, pi/2]).  epsilon = 0 gives pi/2
    exactly; epsilon >= 1 admits no solution.
    """
    if not 0.0 <= epsilon:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    if epsilon >= 1.0:
        raise NoSolutionError(f"no basin angle exists for epsilon = {epsilon} >= 1")
    if epsilon == 0.0:
        return math.pi / 2.0
    lo, hi = 0.0, math.pi / 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if basin_margin(mid, epsilon) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def basin_check(metrics: ErrorMetrics, theta_star: float) -> bool:
    """True when the error is inside the basin {theta_tilde <= theta_star},
    evaluated on the trace so the boundary is included exactly."""
    if not 0.0 < theta_star < math.pi / 2.0 + 1e-12:
        raise ValueError(f"theta_star must lie in (0, pi/2], got {theta_star}")
    return metrics.trace_R_tilde >= 1.0 + 2.0 * math.cos(theta_star)


@dataclass(frozen=True)
class BasinCertificate:
    """Snapshot of the basin conditions for one error state.

    A positive margin together with inside_basin guarantees the error angle
    can never grow past theta_star while the misalignment stays below epsilon.
    """

    theta_star: float
    epsilon: float
    margin: float
    inside_basin: bool

    @property
    def valid(self) -> bool:
        return self.inside_basin and self.margin > 0.0


def certify(metrics: ErrorMetrics, epsilon: float, theta_star: float | None = None) -> BasinCertificate:
    """Build a :class:`BasinCertificate` for the given error state.

    With ``theta_star`` omitted the certificate is evaluated at the current
    error angle, which yields the tightest certificate containing the state.
    """
    ts = metrics.theta_tilde if theta_star is None else float(theta_star)
    if ts > 0.0:
        inside = metrics.trace_R_tilde >= 1.0 + 2.0 * math.cos(ts)
    else:
        inside = metrics.theta_tilde <= 0.0
    return BasinCertificate(
        theta_star=ts,
        epsilon=float(epsilon),
        margin=basin_margin(ts, epsilon),
        inside_basin=inside,
    )


@dataclass(frozen=True)
class LyapunovDecomposition:
    """Closed-form Lyapunov rate split into the aligned part and the
    misalignment coupling term.

    V0        : rate with the misalignment projector removed (<= 0 for error
                angles below pi/2 wherever the aligned geometry applies).
    V_E       : coupling term through the projector difference E.
    E_norm    : spectral norm of E = instantaneous misalignment sine.
    bound_rhs : certified upper bound on V0 + V_E at the supplied (or
                current) error angle and misalignment bound.
    """

    V0: float
    V_E: float
    E_norm: float
    bound_rhs: float

    @property
    def vdot(self) -> float:
        return self.V0 + self.V_E


def _split_core(x, y, z, n_other, k, theta, epsilon):
    """Shared algebra for both two-scalar configurations.

    x, y, z are unit vectors with y the aligned direction, z the doubled-error
    image of y, and n_other the unit normal whose projector replaces the
    aligned one; E = y y^T - n n^T.
    """
    d1 = x - y
    d2 = z - y
    Piy_d2 = d2 - y * float(y @ d2)
    V0 = -k * float(d1 @ Piy_d2)
    E_d2 = y * float(y @ d2) - n_other * float(n_other @ d2)
    V_E = -k * float(d1 @ E_d2)
    E_norm = float(np.linalg.norm(np.cross(y, n_other)))
    eps = E_norm if epsilon is None else float(epsilon)
    bound = -k * (1.0 - float(y @ z)) * (math.cos(theta) - eps / math.cos(theta / 2.0))
    return LyapunovDecomposition(V0=V0, V_E=V_E, E_norm=E_norm, bound_rhs=bound)


def lyapunov_split_two_refs(
    a, R, R_hat, b1, b2, k: float, theta_star: float | None = None, epsilon: float | None = None
) -> LyapunovDecomposition:
    """Lyapunov-rate decomposition for two references measured along one axis.

    V0 projects the rate through the measured direction R a; V_E carries the
    coupling through E = (R a)(R a)^T - n n^T with n the reference-pair
    normal.  ``theta_star``/``epsilon`` default to the current error angle
    and the instantaneous misalignment, giving the sharpest valid bound.
    """
    R = np.asarray(R, dtype=float)
    R_hat = np.asarray(R_hat, dtype=float)
    ah = _unit(a)
    n = _unit(np.cross(np.asarray(b1, dtype=float), np.asarray(b2, dtype=float)))
    R_tilde = R_hat @ R.T
    x = R_hat @ ah
    y = R @ ah
    z = R_tilde @ (R_tilde @ y)
    th = rotation_angle(R_tilde) if theta_star is None else float(theta_star)
    return _split_core(x, y, z, n, float(k), th, epsilon)


def lyapunov_split_two_axes(
    a1, a2, R, R_hat, b1, k: float, theta_star: float | None = None, epsilon: float | None = None
) -> LyapunovDecomposition:
    """Lyapunov-rate decomposition for one reference measured along two axes.

    The roles mirror :func:`lyapunov_split_two_refs` with the reference
    direction as the aligned vector and the axis-plane normal, rotated by R,
    as the other projector.
    """
    R = np.asarray(R, dtype=float)
    R_hat = np.asarray(R_hat, dtype=float)
    bh = _unit(b1)
    n = R @ _unit(np.cross(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float)))
    R_tilde = R_hat @ R.T
    x = R_tilde.T @ bh
    y = bh
    z = R_tilde.T @ (R_tilde.T @ bh)
    th = rotation_angle(R_tilde) if theta_star is None else float(theta_star)
    return _split_core(x, y, z, n, float(k), th, epsilon)


def predicted_vdot_common_axes(axes, R, R_hat, k: float):
    """Predicted Lyapunov rate -k tr(P - P R_tilde^2) for a bank whose
    channels share the axes matrix and whose Gram matrix has full rank.

    Returns (vdot, P, P_hat) where P is the axes-span projector expressed in
    the inertial frame through the true attitude and P_hat its conjugation by
    the error rotation.  The trace is non-negative, so vdot <= 0.
    """
    axes = np.asarray(axes, dtype=float)
    if axes.ndim == 1:
        axes = axes.reshape(3, 1)
    R = np.asarray(R, dtype=float)
    R_hat = np.asarray(R_hat, dtype=float)
    Q = axes @ np.linalg.pinv(axes)
    P = R @ Q @ R.T
    R_tilde = R_hat @ R.T
    P_hat = R_tilde @ P @ R_tilde.T
    vdot = -float(k) * float(np.trace(P - P @ R_tilde @ R_tilde))
    return vdot, P, P_hat


def delta_two_refs_closed(a, R, R_hat, b1, b2, k: float) -> np.ndarray:
    """Closed-form innovation for two references measured along one common
    axis (noiseless outputs): k [Pi_n (R_hat a - R a)] x (R_hat a) with Pi_n
    the projector complementary to the reference-pair normal."""
    ah = _unit(a)
    n = _unit(np.cross(np.asarray(b1, dtype=float), np.asarray(b2, dtype=float)))
    R = np.asarray(R, dtype=float)
    R_hat = np.asarray(R_hat, dtype=float)
    d = R_hat @ ah - R @ ah
    proj = d - n * float(n @ d)
    return float(k) * np.cross(proj, R_hat @ ah)


def delta_two_axes_closed(a1, a2, R, R_hat, b1, k: float) -> np.ndarray:
    """Closed-form innovation for one reference measured along two axes
    (noiseless outputs): k bhat x R_tilde Pi_{R n} (R_tilde^T bhat - bhat)."""
    n = _unit(np.cross(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float)))
    bh = _unit(b1)
    R = np.asarray(R, dtype=float)
    R_hat = np.asarray(R_hat, dtype=float)
    R_tilde = R_hat @ R.T
    Rn = R @ n
    d = R_tilde.T @ bh - bh
    proj = d - Rn * float(Rn @ d)
    return float(k) * np.cross(bh, R_tilde @ proj)
