"""Scalar measurement model.

A sensor channel observes one inertial reference vector through a small set of
body-fixed measurement axes: each scalar output is the inner product of one
axis with the body-frame expression of the reference.  A bank stacks several
channels; its Gram matrix (sum of reference outer products) is what the
observer uses to undo anisotropy in the reference distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "SensorChannel",
    "SensorBank",
    "Measurement",
    "GramFactorization",
    "ChannelFactorization",
    "measure",
    "output_error",
    "gram",
    "axes_factorization",
]

_EPS = np.finfo(float).eps


class DimensionMismatchError(ValueError):
    """Measurement vector does not line up with the bank layout."""


@dataclass(frozen=True)
class SensorChannel:
    """One reference vector with its body-frame measurement axes.

    ref   : (3,) inertial reference vector (need not be unit norm).
    axes  : (3, n) matrix whose columns are the measured body directions,
            1 <= n <= 3.  Columns need not be unit norm or independent;
            rank deficiency is handled by the pseudoinverse downstream.
    """

    ref: np.ndarray
    axes: np.ndarray

    def __post_init__(self):
        ref = np.atleast_1d(np.asarray(self.ref, dtype=float))
        axes = np.asarray(self.axes, dtype=float)
        if axes.ndim == 1:
            axes = axes.reshape(3, 1)
        if ref.shape != (3,):
            raise ValueError(f"ref must have shape (3,), got {ref.shape}")
        if axes.ndim != 2 or axes.shape[0] != 3 or not 1 <= axes.shape[1] <= 3:
            raise ValueError(f"axes must have shape (3, n) with 1 <= n <= 3, got {axes.shape}")
        if not np.all(np.isfinite(ref)) or not np.all(np.isfinite(axes)):
            raise ValueError("non-finite entries in channel definition")
        object.__setattr__(self, "ref", ref)
        object.__setattr__(self, "axes", axes)

    @property
    def size(self) -> int:
        """Number of scalar outputs of this channel."""
        return self.axes.shape[1]


@dataclass(frozen=True)
class SensorBank:
    """Ordered collection of sensor channels."""

    channels: tuple[SensorChannel, ...]

    def __post_init__(self):
        chans = tuple(self.channels)
        if not chans:
            raise ValueError("bank needs at least one channel")
        object.__setattr__(self, "channels", chans)

    def __len__(self) -> int:
        return len(self.channels)

    @property
    def size(self) -> int:
        """Total number of scalar outputs."""
        return sum(c.size for c in self.channels)

    @property
    def refs(self) -> np.ndarray:
        """(3, p) matrix of reference vectors."""
        return np.stack([c.ref for c in self.channels], axis=1)


def vector_bank(refs) -> SensorBank:
    """Bank of full-vector channels (axes = identity) for the given references."""
    return SensorBank(tuple(SensorChannel(np.asarray(r, dtype=float), np.eye(3)) for r in refs))


def scalar_bank(refs, axes) -> SensorBank:
    """Bank where every reference is measured through the same axes matrix."""
    axes = np.asarray(axes, dtype=float)
    return SensorBank(tuple(SensorChannel(np.asarray(r, dtype=float), axes) for r in refs))


@dataclass(frozen=True)
class Measurement:
    """Per-channel scalar outputs; ``stacked`` flattens them in bank order."""

    values: tuple[np.ndarray, ...]

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate(self.values)


def measure(bank: SensorBank, R) -> Measurement:
    """Evaluate the bank outputs at attitude R: channel i yields axes_i^T R^T ref_i."""
    R = np.asarray(R, dtype=float)
    vals = tuple(c.axes.T @ (R.T @ c.ref) for c in bank.channels)
    return Measurement(vals)


def _split(bank: SensorBank, y) -> list[np.ndarray]:
    y = np.asarray(y, dtype=float).ravel()
    if y.size != bank.size:
        raise DimensionMismatchError(f"expected {bank.size} scalars, got {y.size}")
    out = []
    at = 0
    for c in bank.channels:
        out.append(y[at : at + c.size])
        at += c.size
    return out


def output_error(bank: SensorBank, R_hat, y) -> Measurement:
    """Predicted-minus-measured outputs at the estimated attitude.

    ``y`` may be a :class:`Measurement` or a flat array in bank order.
    """
    R_hat = np.asarray(R_hat, dtype=float)
    parts = list(y.values) if isinstance(y, Measurement) else _split(bank, y)
    if len(parts) != len(bank.channels):
        raise DimensionMismatchError("measurement has wrong channel count")
    vals = []
    for c, yi in zip(bank.channels, parts):
        yi = np.asarray(yi, dtype=float).ravel()
        if yi.size != c.size:
            raise DimensionMismatchError(
                f"channel expects {c.size} scalars, got {yi.size}"
            )
        vals.append(c.axes.T @ (R_hat.T @ c.ref) - yi)
    return Measurement(tuple(vals))


@dataclass(frozen=True)
class GramFactorization:
    """Gram matrix of the bank references with its pseudoinverse.

    S        : (3, 3) sum of ref outer products.
    S_pinv   : Moore-Penrose pseudoinverse of S.
    rank     : number of eigenvalues above the cutoff.
    lambda_min_nonzero : smallest retained eigenvalue (0.0 if rank == 0).
    """

    S: np.ndarray
    S_pinv: np.ndarray
    rank: int
    lambda_min_nonzero: float

    def is_uniformly_definite(self, mu: float) -> bool:
        """Full-rank with smallest eigenvalue at least mu (observability check)."""
        return self.rank == 3 and self.lambda_min_nonzero >= mu


def gram(bank: SensorBank, cutoff_scale: float = 3.0) -> GramFactorization:
    """Factor the bank's reference Gram matrix.

    The pseudoinverse is computed from the symmetric eigendecomposition with
    eigenvalues below ``cutoff_scale * eps * lambda_max`` treated as zero.
    """
    B = bank.refs
    S = B @ B.T
    lam, Q = np.linalg.eigh(S)
    cutoff = cutoff_scale * _EPS * max(float(lam[-1]), 0.0)
    keep = lam > cutoff
    inv = np.zeros_like(lam)
    inv[keep] = 1.0 / lam[keep]
    S_pinv = (Q * inv) @ Q.T
    rank = int(np.count_nonzero(keep))
    lam_min = float(lam[keep].min()) if rank else 0.0
    return GramFactorization(S=S, S_pinv=S_pinv, rank=rank, lambda_min_nonzero=lam_min)


@dataclass(frozen=True)
class ChannelFactorization:
    """Pseudoinverse pair of a channel's axes matrix.

    axes_pinv   : (n, 3) pseudoinverse of axes.
    axes_t_pinv : (3, n) pseudoinverse of axes^T (the transpose of the above).
    projector   : (3, 3) orthogonal projector axes @ axes_pinv onto the span
                  of the measurement axes.
    """

    axes_pinv: np.ndarray
    axes_t_pinv: np.ndarray
    projector: np.ndarray


def axes_factorization(channel: SensorChannel, cutoff_scale: float = 3.0) -> ChannelFactorization:
    """SVD pseudoinverse of a channel's axes matrix, same cutoff policy as :func:`gram`."""
    A = channel.axes
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    cutoff = cutoff_scale * _EPS * (float(s[0]) if s.size else 0.0)
    keep = s > cutoff
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    pinv = (Vt.T * inv) @ U.T  # (n, 3)
    return ChannelFactorization(
        axes_pinv=pinv,
        axes_t_pinv=pinv.T,
        projector=A @ pinv,
    )
