"""Compiled integration core for the scenario engine.

Only the hot loop lives here.  Everything that depends on bank geometry or
trajectory shape is tabulated by the engine into flat arrays sampled at the
Runge-Kutta stage times (nodes and midpoints), so the kernel never calls back
into Python.

The innovation is evaluated in the unified form

    delta = k * sum_i  c_i x ( R (Q_i R^T b_i - m_i) )

(the rotated predicted-minus-measured error) which covers both observer
families: for a scalar bank c_i = S^+ b_i, Q_i is the axes-span projector and
m_i the minimum-norm vector consistent with the measured scalars; for the
classical vector-measurement law c_i = b_i (unit references), Q_i = 0 and m_i
is the measured body-frame direction.
"""

import numpy as np
from numba import njit

__all__ = ["integrate"]


@njit(cache=True)
def _rhs(j, R, k, Omega, b, c, m, Q, K):
    """K <- R [Omega]_x + [delta]_x R at stage j."""
    d0 = 0.0
    d1 = 0.0
    d2 = 0.0
    for i in range(b.shape[1]):
        b0 = b[j, i, 0]
        b1 = b[j, i, 1]
        b2 = b[j, i, 2]
        w0 = R[0, 0] * b0 + R[1, 0] * b1 + R[2, 0] * b2
        w1 = R[0, 1] * b0 + R[1, 1] * b1 + R[2, 1] * b2
        w2 = R[0, 2] * b0 + R[1, 2] * b1 + R[2, 2] * b2
        v0 = (Q[i, 0, 0] * w0 + Q[i, 0, 1] * w1 + Q[i, 0, 2] * w2) - m[j, i, 0]
        v1 = (Q[i, 1, 0] * w0 + Q[i, 1, 1] * w1 + Q[i, 1, 2] * w2) - m[j, i, 1]
        v2 = (Q[i, 2, 0] * w0 + Q[i, 2, 1] * w1 + Q[i, 2, 2] * w2) - m[j, i, 2]
        u0 = R[0, 0] * v0 + R[0, 1] * v1 + R[0, 2] * v2
        u1 = R[1, 0] * v0 + R[1, 1] * v1 + R[1, 2] * v2
        u2 = R[2, 0] * v0 + R[2, 1] * v1 + R[2, 2] * v2
        c0 = c[j, i, 0]
        c1 = c[j, i, 1]
        c2 = c[j, i, 2]
        d0 += c1 * u2 - c2 * u1
        d1 += c2 * u0 - c0 * u2
        d2 += c0 * u1 - c1 * u0
    d0 *= k
    d1 *= k
    d2 *= k
    w0 = Omega[j, 0]
    w1 = Omega[j, 1]
    w2 = Omega[j, 2]
    for r in range(3):
        K[r, 0] = R[r, 1] * w2 - R[r, 2] * w1
        K[r, 1] = R[r, 2] * w0 - R[r, 0] * w2
        K[r, 2] = R[r, 0] * w1 - R[r, 1] * w0
    for col in range(3):
        K[0, col] += d1 * R[2, col] - d2 * R[1, col]
        K[1, col] += d2 * R[0, col] - d0 * R[2, col]
        K[2, col] += d0 * R[1, col] - d1 * R[0, col]


@njit(cache=True)
def _orthonormalize(R, A, T):
    """Two Newton-Schulz polar steps, ample for the tiny per-step drift."""
    for _ in range(2):
        for i in range(3):
            for jj in range(3):
                A[i, jj] = (
                    R[0, i] * R[0, jj] + R[1, i] * R[1, jj] + R[2, i] * R[2, jj]
                )
        for i in range(3):
            A[i, i] -= 3.0
        # R <- -0.5 * R @ (A - 3 I)   (i.e. 0.5 R (3I - R^T R))
        for i in range(3):
            for jj in range(3):
                T[i, jj] = -0.5 * (
                    R[i, 0] * A[0, jj] + R[i, 1] * A[1, jj] + R[i, 2] * A[2, jj]
                )
        for i in range(3):
            for jj in range(3):
                R[i, jj] = T[i, jj]


@njit(cache=True)
def integrate(R0, k, h, Omega, b, c, m, Q):
    """March the estimate through all steps; returns attitudes at the nodes.

    h        : (M,) step sizes (the node grid need not be uniform).
    Omega    : (2M+1, 3) angular velocity at nodes and midpoints, interleaved.
    b, c, m  : (2M+1, p, 3) per-channel stage tables (see module docstring).
    Q        : (p, 3, 3) per-channel projector.
    """
    M = h.shape[0]
    out = np.empty((M + 1, 3, 3))
    R = R0.copy()
    out[0] = R
    K1 = np.empty((3, 3))
    K2 = np.empty((3, 3))
    K3 = np.empty((3, 3))
    K4 = np.empty((3, 3))
    Rt = np.empty((3, 3))
    A = np.empty((3, 3))
    T = np.empty((3, 3))
    for s in range(M):
        hs = h[s]
        ja = 2 * s
        jm = 2 * s + 1
        jb = 2 * s + 2
        _rhs(ja, R, k, Omega, b, c, m, Q, K1)
        for i in range(3):
            for jj in range(3):
                Rt[i, jj] = R[i, jj] + 0.5 * hs * K1[i, jj]
        _rhs(jm, Rt, k, Omega, b, c, m, Q, K2)
        for i in range(3):
            for jj in range(3):
                Rt[i, jj] = R[i, jj] + 0.5 * hs * K2[i, jj]
        _rhs(jm, Rt, k, Omega, b, c, m, Q, K3)
        for i in range(3):
            for jj in range(3):
                Rt[i, jj] = R[i, jj] + hs * K3[i, jj]
        _rhs(jb, Rt, k, Omega, b, c, m, Q, K4)
        for i in range(3):
            for jj in range(3):
                R[i, jj] = R[i, jj] + (hs / 6.0) * (
                    K1[i, jj] + 2.0 * K2[i, jj] + 2.0 * K3[i, jj] + K4[i, jj]
                )
        _orthonormalize(R, A, T)
        out[s + 1] = R
    return out
