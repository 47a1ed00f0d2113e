"""Benchmark scenarios: truth trajectories, sensor banks, and observer setup.

Three families are built in.  ``sim1`` flies a yaw/roll-oscillation with a
stalled middle segment and measures gravity, the magnetic field, and the
inertial velocity through body axes.  ``sim2`` keeps the oscillation going and
measures gravity and the magnetic field along the single body axis e1.
``sim3`` is a slow loiter turn whose only reference is the inertial velocity,
measured through a symmetric pair of tilted airspeed axes.

All truth attitudes are closed-form, so sampling at arbitrary times is exact;
angular velocities are the exact derivatives of those attitudes (checked by
the kinematic-consistency tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .sensors import SensorBank, SensorChannel
from .so3 import euler_zyx, rot_x, rot_y, rot_z

__all__ = [
    "GRAVITY",
    "DegenerateGeometryError",
    "IncompatibleVariantError",
    "ScenarioConfig",
    "TrajectorySample",
    "TruthArrays",
    "VariantSpec",
    "config_for",
    "sim1_config",
    "sim2_config",
    "sim3_config",
    "truth_arrays",
    "sample",
    "variants_for",
    "certified_epsilon",
    "pitot_geometry",
    "accel_mag_pitot_bank",
]

GRAVITY = 9.8  # m/s^2, magnitude of the gravity reference

_E1 = np.array([1.0, 0.0, 0.0])
_E3 = np.array([0.0, 0.0, 1.0])


class DegenerateGeometryError(ValueError):
    """Sensor geometry collapses (e.g. coincident airspeed axes)."""


class IncompatibleVariantError(ValueError):
    """Requested observer variant does not exist for the scenario family."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully parameterized scenario.

    Angles are radians, times seconds.  ``scenario`` is the run label
    (sim1/sim2/sim3/custom); ``family`` picks the trajectory/bank family and
    equals the label for the built-in scenarios.  Fields irrelevant to a
    family (e.g. ``alpha_max`` for sim1) are carried but unused.

    psi0, phi0 : amplitudes of the yaw oscillation and of the x-axis
                 oscillation in the sim1/sim2 attitude Rz(psi) Rx(phi).
    omega      : oscillation rate (sim1/sim2) or turn rate (sim3).
    r0_hat     : initial attitude estimate.  The initial truth attitude is
                 not configurable; it is pinned by the family's closed form.
    """

    scenario: str
    family: str
    duration: float
    dt: float
    k_scalar: float
    k_vector: float
    pe_window: float
    noise_std: float
    seed: int
    psi0: float
    phi0: float
    omega: float
    omega_alpha: float
    omega_beta: float
    alpha_max: float
    beta_max: float
    gamma_dip: float
    gamma_tilt: float
    phi_spread: float
    v_speed: float
    r0_hat: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.family not in ("sim1", "sim2", "sim3"):
            raise ValueError(f"unknown trajectory family {self.family!r}")
        if not self.duration > 0.0 or not self.dt > 0.0:
            raise ValueError("duration and dt must be positive")
        if self.dt > self.duration:
            raise ValueError("dt exceeds duration")
        if self.k_scalar <= 0.0 or self.k_vector <= 0.0:
            raise ValueError("gains must be positive")
        if self.pe_window <= 0.0:
            raise ValueError("pe_window must be positive")
        if self.noise_std < 0.0:
            raise ValueError("noise_std must be non-negative")
        R = np.asarray(self.r0_hat, dtype=float)
        if R.shape != (3, 3):
            raise ValueError("r0_hat must be a 3x3 matrix")
        object.__setattr__(self, "r0_hat", R)

    @property
    def r0_true(self) -> np.ndarray:
        """Initial truth attitude (derived from the family's closed form)."""
        return truth_arrays(self, np.zeros(1)).R[0]

    @property
    def steps(self) -> int:
        return int(math.floor(self.duration / self.dt + 1e-9))


_DEFAULTS = {
    "sim1": dict(
        duration=100.0,
        k_scalar=0.5,
        k_vector=2.0,
        psi0=math.pi / 6.0,
        phi0=math.pi / 9.0,
        omega=0.5,
        v_speed=15.0,
    ),
    "sim2": dict(
        duration=220.0,
        k_scalar=1.5,
        k_vector=2.5,
        psi0=math.radians(15.0),
        phi0=math.radians(15.0),
        omega=1.0,
        v_speed=15.0,
    ),
    "sim3": dict(
        duration=60.0,
        k_scalar=1.5,
        k_vector=0.6,
        psi0=0.0,
        phi0=0.0,
        omega=0.35,
        v_speed=1.0,
    ),
}

_R0_HAT = {
    "sim1": lambda: np.eye(3),
    "sim2": lambda: rot_z(-math.pi / 6) @ rot_y(-math.pi / 4) @ rot_x(-math.pi / 8),
    "sim3": lambda: rot_z(math.pi / 12) @ rot_y(math.pi / 18) @ rot_x(math.pi / 24),
}


def config_for(scenario: str, family: str | None = None, **overrides) -> ScenarioConfig:
    """Build a scenario configuration with family defaults applied.

    ``scenario`` is sim1/sim2/sim3 (family implied) or ``custom`` with an
    explicit ``family``.  Keyword overrides replace any config field.
    """
    if scenario in _DEFAULTS:
        fam = scenario if family is None else family
        if fam != scenario:
            raise ValueError(f"scenario {scenario!r} implies family {scenario!r}")
    elif scenario == "custom":
        if family is None:
            raise ValueError("custom scenario needs an explicit family")
        fam = family
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    if fam not in _DEFAULTS:
        raise ValueError(f"unknown trajectory family {fam!r}")
    base = dict(
        scenario=scenario,
        family=fam,
        dt=1e-3,
        pe_window=2.0,
        noise_std=0.0,
        seed=0,
        omega_alpha=0.17,
        omega_beta=0.23,
        alpha_max=math.radians(20.0),
        beta_max=math.radians(25.0),
        gamma_dip=math.radians(60.0),
        gamma_tilt=math.radians(45.0),
        phi_spread=math.radians(20.0),
    )
    base.update(_DEFAULTS[fam])
    base["r0_hat"] = _R0_HAT[fam]()
    bad = set(overrides) - set(base)
    if bad:
        raise ValueError(f"unknown config fields: {sorted(bad)}")
    base.update(overrides)
    return ScenarioConfig(**base)


def sim1_config(**overrides) -> ScenarioConfig:
    """Oscillation with a stalled segment; gravity + magnetic field + velocity."""
    return config_for("sim1", **overrides)


def sim2_config(**overrides) -> ScenarioConfig:
    """Persistent oscillation; gravity + magnetic field along a single axis."""
    return config_for("sim2", **overrides)


def sim3_config(**overrides) -> ScenarioConfig:
    """Loiter turn; inertial velocity through a tilted airspeed-axis pair."""
    return config_for("sim3", **overrides)


@dataclass(frozen=True)
class TruthArrays:
    """Truth trajectory sampled on a time grid.

    refs holds the scalar-bank reference vectors, one (3,) column per channel:
    [gravity, magnetic, velocity] for sim1, [gravity, magnetic] for sim2 and
    [velocity] for sim3.
    """

    t: np.ndarray  # (N,)
    R: np.ndarray  # (N, 3, 3)
    Omega: np.ndarray  # (N, 3)
    refs: np.ndarray  # (N, 3, p)


def _mag_ref(cfg: ScenarioConfig) -> np.ndarray:
    return np.array([math.cos(cfg.gamma_dip), 0.0, math.sin(cfg.gamma_dip)])


def _zyx_stack(psi, phi):
    """Batched Rz(psi) @ Rx(phi)."""
    cp, sp = np.cos(psi), np.sin(psi)
    cf, sf = np.cos(phi), np.sin(phi)
    z = np.zeros_like(psi)
    return np.stack(
        [
            np.stack([cp, -sp * cf, sp * sf], axis=-1),
            np.stack([sp, cp * cf, -cp * sf], axis=-1),
            np.stack([z, sf, cf], axis=-1),
        ],
        axis=-2,
    )


def _oscillation_truth(cfg: ScenarioConfig, t: np.ndarray, stalled: bool) -> TruthArrays:
    if stalled:
        # three segments: active on [0, pi], frozen on (pi, 4 pi], active after
        # with the phase re-based so attitude and rates splice continuously
        tau = np.where(t <= math.pi, t, np.where(t <= 4 * math.pi, math.pi, t - 3 * math.pi))
        active = (t <= math.pi) | (t > 4 * math.pi)
    else:
        tau = t
        active = np.ones_like(t, dtype=bool)
    w = cfg.omega
    psi = -math.pi / 2.0 + cfg.psi0 * np.sin(w * tau)
    phi = cfg.phi0 * np.cos(w * tau)
    psid = np.where(active, cfg.psi0 * w * np.cos(w * tau), 0.0)
    phid = np.where(active, -cfg.phi0 * w * np.sin(w * tau), 0.0)
    R = _zyx_stack(psi, phi)
    Omega = np.stack([phid, psid * np.sin(phi), psid * np.cos(phi)], axis=-1)
    g = GRAVITY * _E3
    m = _mag_ref(cfg)
    cols = [np.broadcast_to(g, (t.size, 3)), np.broadcast_to(m, (t.size, 3))]
    if stalled:
        v = cfg.v_speed * np.stack([np.cos(psi), np.sin(psi), np.zeros_like(psi)], axis=-1)
        cols.append(v)
    refs = np.stack(cols, axis=-1)
    return TruthArrays(t=t, R=R, Omega=Omega, refs=refs)


def _loiter_truth(cfg: ScenarioConfig, t: np.ndarray) -> TruthArrays:
    al = cfg.alpha_max * np.sin(cfg.omega_alpha * t)
    be = cfg.beta_max * np.sin(cfg.omega_beta * t)
    ald = cfg.alpha_max * cfg.omega_alpha * np.cos(cfg.omega_alpha * t)
    sd = cfg.omega - cfg.beta_max * cfg.omega_beta * np.cos(cfg.omega_beta * t)
    s = cfg.omega * t - be
    cs, ss = np.cos(s), np.sin(s)
    ca, sa = np.cos(al), np.sin(al)
    z = np.zeros_like(t)
    # Rz(s) @ Ry(alpha)
    R = np.stack(
        [
            np.stack([cs * ca, -ss, cs * sa], axis=-1),
            np.stack([ss * ca, cs, ss * sa], axis=-1),
            np.stack([-sa, z, ca], axis=-1),
        ],
        axis=-2,
    )
    Omega = np.stack([-sd * sa, ald, sd * ca], axis=-1)
    v = cfg.v_speed * np.stack([np.cos(cfg.omega * t), np.sin(cfg.omega * t), z], axis=-1)
    refs = v[:, :, None]
    return TruthArrays(t=t, R=R, Omega=Omega, refs=refs)


def truth_arrays(cfg: ScenarioConfig, t) -> TruthArrays:
    """Sample the closed-form truth trajectory on an array of times."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if cfg.family == "sim1":
        return _oscillation_truth(cfg, t, stalled=True)
    if cfg.family == "sim2":
        return _oscillation_truth(cfg, t, stalled=False)
    return _loiter_truth(cfg, t)


def pitot_geometry(gamma_tilt: float, phi_spread: float):
    """Airspeed-axis pair tilted by gamma_tilt toward e3 and spread by
    +/- phi_spread toward e2, with the unit normal of their plane.

    Returns (a1, a2, normal).  Both axes are unit norm by construction; the
    normal is independent of the spread angle.
    """
    if not 0.0 < gamma_tilt < math.pi / 2.0:
        raise ValueError("gamma_tilt must lie in (0, pi/2)")
    if not 0.0 <= phi_spread < math.pi / 2.0:
        raise ValueError("phi_spread must lie in [0, pi/2)")
    center = math.cos(gamma_tilt) * _E1 + math.sin(gamma_tilt) * _E3
    a1 = math.cos(phi_spread) * center + math.sin(phi_spread) * np.array([0.0, 1.0, 0.0])
    a2 = math.cos(phi_spread) * center - math.sin(phi_spread) * np.array([0.0, 1.0, 0.0])
    n = np.cross(a1, a2)
    nn = float(np.linalg.norm(n))
    if nn < 1e-9:
        raise DegenerateGeometryError("airspeed axes are (near-)coincident")
    return a1, a2, n / nn


def accel_mag_pitot_bank(gamma_dip: float, v_inertial, axes=None) -> SensorBank:
    """Bank measuring gravity, the magnetic reference at the given dip angle,
    and an inertial velocity, each through the same axes (default e1)."""
    axes = _E1.reshape(3, 1) if axes is None else np.asarray(axes, dtype=float)
    m = np.array([math.cos(gamma_dip), 0.0, math.sin(gamma_dip)])
    return SensorBank(
        (
            SensorChannel(GRAVITY * _E3, axes),
            SensorChannel(m, axes),
            SensorChannel(np.asarray(v_inertial, dtype=float), axes),
        )
    )


@dataclass(frozen=True)
class VariantSpec:
    """How one observer variant consumes the scenario truth.

    kind        : "scalar" (generalized innovation through ``axes``) or
                  "vector" (classical innovation on normalized references).
    ref_indices : which truth reference columns feed the bank.
    diagnostics : which Lyapunov-rate decomposition applies
                  ("common-axes", "two-refs", "two-axes", "classical").
    excitation  : direction source for the excitation metric, either the
                  rotated axes span ("body-axes") or the first reference
                  direction ("reference").
    """

    name: str
    kind: str
    axes: np.ndarray | None
    ref_indices: tuple[int, ...]
    diagnostics: str
    excitation: str
    gain: Callable[[ScenarioConfig], float]


def variants_for(cfg: ScenarioConfig) -> dict[str, VariantSpec]:
    """Observer variants available for the scenario family, keyed by name."""
    k_s = lambda c: c.k_scalar
    k_v = lambda c: c.k_vector
    if cfg.family == "sim1":
        return {
            "scalar-3": VariantSpec(
                "scalar-3", "scalar", _E1.reshape(3, 1), (0, 1, 2), "common-axes", "body-axes", k_s
            ),
            "scalar-6": VariantSpec(
                "scalar-6",
                "scalar",
                np.stack([_E1, _E3], axis=1),
                (0, 1, 2),
                "common-axes",
                "body-axes",
                k_s,
            ),
            "vector-baseline": VariantSpec(
                "vector-baseline", "vector", None, (0, 1), "classical", "body-axes", k_v
            ),
        }
    if cfg.family == "sim2":
        return {
            "scalar-2": VariantSpec(
                "scalar-2", "scalar", _E1.reshape(3, 1), (0, 1), "two-refs", "body-axes", k_s
            ),
            "vector-baseline": VariantSpec(
                "vector-baseline", "vector", None, (0, 1), "classical", "body-axes", k_v
            ),
        }
    a1, a2, _ = pitot_geometry(cfg.gamma_tilt, cfg.phi_spread)
    return {
        "scalar-2": VariantSpec(
            "scalar-2", "scalar", np.stack([a1, a2], axis=1), (0,), "two-axes", "reference", k_s
        ),
        "vector-baseline": VariantSpec(
            "vector-baseline", "vector", None, (0,), "classical", "reference", k_v
        ),
    }


def certified_epsilon(cfg: ScenarioConfig) -> float | None:
    """A-priori bound on the misalignment number along the trajectory, for
    families with a two-scalar configuration (None for sim1).

    sim2: the yaw oscillation keeps the measured axis within psi0 of the
    reference-pair normal's orthogonal plane, so epsilon <= sin(psi0).
    sim3: the wind-frame bounds give
    sqrt(1 - cos(beta_max)^2 sin(gamma_tilt - alpha_max)^2).
    """
    if cfg.family == "sim2":
        return math.sin(cfg.psi0)
    if cfg.family == "sim3":
        s = math.sin(cfg.gamma_tilt - cfg.alpha_max)
        c = math.cos(cfg.beta_max)
        return math.sqrt(max(0.0, 1.0 - c * c * s * s))
    return None


@dataclass(frozen=True)
class TrajectorySample:
    """Truth state and sensor bank at one instant."""

    t: float
    R: np.ndarray
    Omega: np.ndarray
    bank: SensorBank


def _bank_at(cfg: ScenarioConfig, spec: VariantSpec, refs_t: np.ndarray) -> SensorBank:
    cols = [refs_t[:, i] for i in spec.ref_indices]
    if spec.kind == "vector":
        chans = tuple(
            SensorChannel(c / np.linalg.norm(c), np.eye(3)) for c in cols
        )
    else:
        chans = tuple(SensorChannel(c, spec.axes) for c in cols)
    return SensorBank(chans)


def sample(cfg: ScenarioConfig, t: float, variant: str | None = None) -> TrajectorySample:
    """Sample truth and the variant's sensor bank at time t.

    ``variant`` defaults to the family's scalar variant.
    """
    specs = variants_for(cfg)
    if variant is None:
        variant = "scalar-3" if cfg.family == "sim1" else "scalar-2"
    if variant not in specs:
        raise IncompatibleVariantError(
            f"variant {variant!r} not available for family {cfg.family!r}"
            f" (choose from {sorted(specs)})"
        )
    arr = truth_arrays(cfg, np.array([t], dtype=float))
    return TrajectorySample(
        t=float(t),
        R=arr.R[0],
        Omega=arr.Omega[0],
        bank=_bank_at(cfg, specs[variant], arr.refs[0]),
    )
