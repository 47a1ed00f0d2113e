"""Attitude observer driven by scalar measurements.

The estimate evolves by the true angular velocity plus an innovation term
acting on the inertial side:

    d/dt R_hat = R_hat hat(Omega) + hat(Delta) R_hat

The generalized innovation weighs each channel's output error through the
pseudoinverses of the bank Gram matrix and of the channel axes, which makes
the correction insensitive to reference magnitudes and to how unevenly the
references are distributed.  On banks of full orthonormal vector channels it
reduces to the familiar sum of measured-cross-predicted terms.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .sensors import (
    Measurement,
    SensorBank,
    axes_factorization,
    gram,
    output_error,
)
from .so3 import hat, project_to_so3

__all__ = [
    "NotVectorBankError",
    "ObserverState",
    "InnovationReport",
    "innovation",
    "classical_innovation",
    "observer_step",
    "truth_step",
]


class NotVectorBankError(ValueError):
    """Raised when an operation needs full-vector channels (axes == identity)."""


@dataclass(frozen=True)
class ObserverState:
    """Current attitude estimate and innovation gain."""

    R_hat: np.ndarray
    k: float

    def __post_init__(self):
        R = np.asarray(self.R_hat, dtype=float)
        if R.shape != (3, 3):
            raise ValueError(f"R_hat must have shape (3, 3), got {R.shape}")
        if not float(self.k) > 0.0:
            raise ValueError(f"gain must be positive, got {self.k}")
        object.__setattr__(self, "R_hat", R)
        object.__setattr__(self, "k", float(self.k))


@dataclass(frozen=True)
class InnovationReport:
    """Innovation vector and its per-channel contributions (which sum to delta)."""

    delta: np.ndarray
    contributions: tuple[np.ndarray, ...]


def innovation(
    bank: SensorBank,
    state: ObserverState,
    y,
    gram_fact=None,
    axes_facts=None,
) -> InnovationReport:
    """Generalized innovation for a bank of scalar channels.

    Channel i contributes  k * (S^+ ref_i) x (R_hat (axes_i^T)^+ ytilde_i)
    where ytilde is the output error at the current estimate.  Precomputed
    factorizations may be passed in when the bank is constant; results are
    identical to recomputing them.
    """
    R_hat = state.R_hat
    if gram_fact is None:
        gram_fact = gram(bank)
    if axes_facts is None:
        axes_facts = tuple(axes_factorization(c) for c in bank.channels)
    ytil = output_error(bank, R_hat, y)
    contribs = []
    for c, f, e in zip(bank.channels, axes_facts, ytil.values):
        lever = gram_fact.S_pinv @ c.ref
        contribs.append(state.k * np.cross(lever, R_hat @ (f.axes_t_pinv @ e)))
    delta = np.sum(contribs, axis=0)
    return InnovationReport(delta=delta, contributions=tuple(contribs))


def classical_innovation(bank: SensorBank, state: ObserverState, y) -> np.ndarray:
    """Cross-product innovation for full-vector channels.

    delta = k * R_hat * sum_i  y_i x (R_hat^T ref_i)

    with y_i the measured body-frame reference (the sign pairs measured with
    predicted so that the correction shrinks the estimation error).  Requires
    every channel's axes to be the identity; raises NotVectorBankError
    otherwise.
    """
    for c in bank.channels:
        if c.axes.shape != (3, 3) or np.max(np.abs(c.axes - np.eye(3))) > 1e-12:
            raise NotVectorBankError("classical innovation needs axes == identity")
    parts = list(y.values) if isinstance(y, Measurement) else None
    if parts is None:
        y = np.asarray(y, dtype=float).ravel()
        if y.size != 3 * len(bank.channels):
            raise NotVectorBankError(
                f"expected {3 * len(bank.channels)} scalars, got {y.size}"
            )
        parts = [y[3 * i : 3 * i + 3] for i in range(len(bank.channels))]
    R_hat = state.R_hat
    acc = np.zeros(3)
    for c, yi in zip(bank.channels, parts):
        acc += np.cross(np.asarray(yi, dtype=float), R_hat.T @ c.ref)
    return state.k * (R_hat @ acc)


def _rk4_rotation_step(R, omega_fn, delta_fn, dt: float) -> np.ndarray:
    """One fixed-step RK4 update of dR/dt = R hat(omega) + hat(delta) R, then
    re-projection onto SO(3)."""

    def rhs(s, Rs):
        return Rs @ hat(omega_fn(s)) + hat(delta_fn(s, Rs)) @ Rs

    k1 = rhs(0.0, R)
    k2 = rhs(dt / 2.0, R + (dt / 2.0) * k1)
    k3 = rhs(dt / 2.0, R + (dt / 2.0) * k2)
    k4 = rhs(dt, R + dt * k3)
    return project_to_so3(R + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def _as_omega_fn(omega):
    if callable(omega):
        return omega
    w = np.asarray(omega, dtype=float)
    return lambda s: w


def _as_delta_fn(delta):
    if callable(delta):
        return delta
    d = np.asarray(delta, dtype=float)
    return lambda s, R: d


def observer_step(state: ObserverState, omega, delta, dt: float) -> ObserverState:
    """Advance the estimate by one RK4 step of length dt.

    ``omega`` is the body angular velocity: a (3,) vector held constant over
    the step, or a callable s -> (3,) sampled at the RK4 sub-stage offsets
    s in {0, dt/2, dt}.  ``delta`` is the innovation: a (3,) vector or a
    callable (s, R_hat) -> (3,) evaluated with the sub-stage estimate.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    R = _rk4_rotation_step(state.R_hat, _as_omega_fn(omega), _as_delta_fn(delta), dt)
    return replace(state, R_hat=R)


def truth_step(R, omega, dt: float) -> np.ndarray:
    """Advance a reference attitude by one RK4 step of dR/dt = R hat(omega).

    Same sub-stage sampling rules as :func:`observer_step`.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    zero = lambda s, Rs: np.zeros(3)
    return _rk4_rotation_step(np.asarray(R, dtype=float), _as_omega_fn(omega), zero, dt)
