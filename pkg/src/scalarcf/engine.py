"""Scenario engine: runs observer variants against the benchmark trajectories.

The engine tabulates the truth trajectory and every measurement-derived
quantity at the Runge-Kutta stage times, hands the flat tables to the
compiled integrator, and post-processes the logged estimates into the
diagnostic columns written to CSV.  Runs are deterministic: identical config
and seed give bit-identical records.

Integration nodes are the uniform logging grid plus the trajectory's rate
discontinuities (the stall boundaries of the sim1 family), so no
Runge-Kutta step straddles a kink.  Only uniform-grid rows are logged.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import analysis, scenarios
from ._kernel import integrate
from .scenarios import ScenarioConfig, TruthArrays, VariantSpec
from .sensors import SensorChannel, axes_factorization
from .so3 import is_rotation

__all__ = [
    "CSV_COLUMNS",
    "NonFiniteStateError",
    "RunRecord",
    "RunManifest",
    "run",
    "timed_run",
    "emit_csv",
    "load_csv",
    "config_digest",
    "warmup",
]

_EPS = float(np.finfo(float).eps)

CSV_COLUMNS = (
    "t",
    "theta_tilde_deg",
    "V",
    "mu_hat",
    "epsilon_value",
    "margin",
    "inside_basin",
    "V_dot_numeric",
    "V0",
    "V_E",
    "yaw_deg",
    "pitch_deg",
    "roll_deg",
)


class NonFiniteStateError(RuntimeError):
    """Integration produced a non-finite estimate (reports variant and time)."""


@dataclass(frozen=True)
class RunRecord:
    """Logged trajectory of one observer variant on the uniform grid.

    All column arrays share length floor(duration/dt) + 1.  ``R_hat`` keeps
    the full estimate stack for downstream analysis; it is not part of the
    CSV surface.
    """

    scenario: str
    variant: str
    t: np.ndarray
    theta_tilde_deg: np.ndarray
    V: np.ndarray
    mu_hat: np.ndarray
    epsilon_value: np.ndarray
    margin: np.ndarray
    inside_basin: np.ndarray
    V_dot_numeric: np.ndarray
    V0: np.ndarray
    V_E: np.ndarray
    yaw_deg: np.ndarray
    pitch_deg: np.ndarray
    roll_deg: np.ndarray
    R_hat: np.ndarray = field(repr=False)

    @property
    def n_rows(self) -> int:
        return int(self.t.size)

    def table(self) -> np.ndarray:
        """Rows in CSV column order (inside_basin cast to float)."""
        return np.column_stack([np.asarray(getattr(self, c), dtype=float) for c in CSV_COLUMNS])


@dataclass(frozen=True)
class RunManifest:
    """Provenance summary of one engine invocation."""

    version: str
    scenario: str
    family: str
    config_digest: str
    seed: int
    noise_std: float
    dt: float
    duration: float
    variants: tuple[str, ...]
    wall_time_s: dict
    verdicts: dict
    created_utc: str

    def to_json(self) -> str:
        payload = {
            "version": self.version,
            "scenario": self.scenario,
            "family": self.family,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "noise_std": self.noise_std,
            "dt": self.dt,
            "duration": self.duration,
            "variants": list(self.variants),
            "wall_time_s": self.wall_time_s,
            "verdicts": self.verdicts,
            "created_utc": self.created_utc,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")


def config_digest(cfg: ScenarioConfig) -> str:
    """sha256 over a canonical full-precision flat rendering of the config."""
    items = []
    for name in sorted(vars(cfg)):
        value = getattr(cfg, name)
        if isinstance(value, np.ndarray):
            rendered = " ".join(f"{x:.17g}" for x in value.ravel())
        elif isinstance(value, float):
            rendered = f"{value:.17g}"
        else:
            rendered = str(value)
        items.append(f"{name}={rendered}")
    return hashlib.sha256("\n".join(items).encode()).hexdigest()


def _node_grid(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    """Integration nodes and the indices of the uniform logging grid."""
    t_log = cfg.dt * np.arange(cfg.steps + 1)
    extras = []
    if cfg.family == "sim1":
        for bpt in (math.pi, 4.0 * math.pi):
            if 0.0 < bpt < t_log[-1] and np.min(np.abs(t_log - bpt)) > 1e-9:
                extras.append(bpt)
    if extras:
        nodes = np.sort(np.concatenate([t_log, np.asarray(extras)]))
    else:
        nodes = t_log
    log_idx = np.searchsorted(nodes, t_log)
    return nodes, log_idx


def _stage_times(nodes: np.ndarray) -> np.ndarray:
    """Nodes interleaved with step midpoints: [n0, m0, n1, m1, ..., nM]."""
    out = np.empty(2 * nodes.size - 1)
    out[::2] = nodes
    out[1::2] = 0.5 * (nodes[:-1] + nodes[1:])
    return out


def _stage_noise(noise_nodes: np.ndarray | None, n_stages: int) -> np.ndarray | None:
    if noise_nodes is None:
        return None
    # midpoints reuse the left node's draw (measurements held over the step)
    return noise_nodes[np.arange(n_stages) // 2]


def _gram_pinv2(G: np.ndarray) -> np.ndarray:
    """Pseudoinverse of a stack of symmetric 2x2 Gram matrices.

    Fast closed-form inverse on clearly full-rank rows; anything within
    1e-6 of singular (relative to the largest eigenvalue) goes through the
    exact pseudoinverse instead — the adjugate of a near-singular matrix is
    dominated by its kernel projector, so the closed form cannot be trusted
    near the rank boundary.
    """
    a, d, c = G[:, 0, 0], G[:, 1, 1], G[:, 0, 1]
    half = 0.5 * (a + d)
    delta = np.sqrt((0.5 * (a - d)) ** 2 + c * c)
    lam_hi = half + delta
    lam_lo = half - delta
    # generous band: the closed-form eigenvalues of a (near-)singular matrix
    # carry absolute error well above eps * lam_hi, so a tight cutoff would
    # let junk smallest-eigenvalues through to the closed-form inverse
    safe = lam_lo > 1e-6 * np.maximum(lam_hi, 0.0)
    det = np.where(safe, lam_hi * lam_lo, 1.0)
    out = np.empty_like(G)
    out[:, 0, 0] = d / det
    out[:, 1, 1] = a / det
    out[:, 0, 1] = out[:, 1, 0] = -c / det
    risky = np.flatnonzero(~safe)
    if risky.size:
        out[risky] = np.linalg.pinv(G[risky], rcond=3.0 * _EPS, hermitian=True)
    return out


def _gram_pinv3(G: np.ndarray) -> np.ndarray:
    """Pseudoinverse of a stack of symmetric 3x3 Gram matrices; same rank
    policy as :func:`_gram_pinv2`."""
    lam = analysis.eigvals_sym3(G)
    safe = lam[:, 0] > 1e-6 * np.maximum(lam[:, 2], 0.0)
    a00, a01, a02 = G[:, 0, 0], G[:, 0, 1], G[:, 0, 2]
    a11, a12, a22 = G[:, 1, 1], G[:, 1, 2], G[:, 2, 2]
    det = np.where(safe, lam[:, 0] * lam[:, 1] * lam[:, 2], 1.0)
    out = np.empty_like(G)
    out[:, 0, 0] = (a11 * a22 - a12 * a12) / det
    out[:, 1, 1] = (a00 * a22 - a02 * a02) / det
    out[:, 2, 2] = (a00 * a11 - a01 * a01) / det
    out[:, 0, 1] = out[:, 1, 0] = (a02 * a12 - a01 * a22) / det
    out[:, 0, 2] = out[:, 2, 0] = (a01 * a12 - a02 * a11) / det
    out[:, 1, 2] = out[:, 2, 1] = (a01 * a02 - a00 * a12) / det
    risky = np.flatnonzero(~safe)
    if risky.size:
        out[risky] = np.linalg.pinv(G[risky], rcond=3.0 * _EPS, hermitian=True)
    return out


def _min_norm_levers(b: np.ndarray) -> np.ndarray:
    """Per-stage lever vectors c_i = S^+ b_i for S = sum_i b_i b_i^T.

    Evaluated through the channel Gram B^T B (identical nonzero spectrum, so
    the cutoff rule carries over) as C = B (B^T B)^+, which keeps the work at
    p x p instead of a 3x3 eigendecomposition per stage.
    """
    p = b.shape[1]
    if p == 1:
        lam = np.einsum("si,si->s", b[:, 0], b[:, 0])
        inv = np.where(lam > 0.0, 1.0 / np.where(lam > 0.0, lam, 1.0), 0.0)
        return b * inv[:, None, None]
    G = np.einsum("spi,sqi->spq", b, b)
    Ginv = _gram_pinv2(G) if p == 2 else _gram_pinv3(G)
    return np.einsum("sqi,sqp->spi", b, Ginv)


def _scalar_tables(cfg, spec, tr: TruthArrays, noise):
    refs = tr.refs[:, :, list(spec.ref_indices)]  # (S, 3, p)
    b = np.swapaxes(refs, 1, 2).copy()  # (S, p, 3)
    fact = axes_factorization(SensorChannel(np.array([0.0, 0.0, 1.0]), spec.axes))
    Qp = fact.projector
    n_axes = spec.axes.shape[1]
    c = _min_norm_levers(b)
    w = np.einsum("sji,spj->spi", tr.R, b)  # body-frame references
    m = np.einsum("ij,spj->spi", Qp, w)
    if noise is not None:
        for slot, r in enumerate(spec.ref_indices):
            m[:, slot, :] += cfg.noise_std * np.einsum(
                "ia,sa->si", fact.axes_t_pinv, noise[:, r, :n_axes]
            )
    Q = np.broadcast_to(Qp, (b.shape[1], 3, 3)).copy()
    return b, c, m, Q


def _vector_tables(cfg, spec, tr: TruthArrays, noise):
    refs = tr.refs[:, :, list(spec.ref_indices)]
    b = np.swapaxes(refs, 1, 2).copy()
    b /= np.linalg.norm(b, axis=2, keepdims=True)
    c = b
    m = np.einsum("sji,spj->spi", tr.R, b)
    if noise is not None:
        for slot, r in enumerate(spec.ref_indices):
            m[:, slot, :] += cfg.noise_std * noise[:, r, :]
    Q = np.zeros((b.shape[1], 3, 3))
    return b, c, m, Q


def _unit_rows(M: np.ndarray) -> np.ndarray:
    return M / np.linalg.norm(M, axis=1, keepdims=True)


def _diagnostic_columns(cfg, spec, t_log, R_tru, refs, R_hat) -> dict:
    L = t_log.size
    k = spec.gain(cfg)
    dt = cfg.dt
    R_tru_T = np.ascontiguousarray(np.swapaxes(R_tru, 1, 2))
    Rt = R_hat @ R_tru_T  # error rotation estimate * truth^T
    tr = np.einsum("lii->l", Rt)
    theta = np.arccos(np.clip((tr - 1.0) / 2.0, -1.0, 1.0))
    V = 3.0 - tr

    s_p = np.clip(-R_hat[:, 2, 0], -1.0, 1.0)
    pitch = np.arcsin(s_p)
    gimbal = np.abs(s_p) > 1.0 - 1e-12
    yaw = np.where(
        gimbal,
        np.arctan2(-R_hat[:, 0, 1], R_hat[:, 1, 1]),
        np.arctan2(R_hat[:, 1, 0], R_hat[:, 0, 0]),
    )
    roll = np.where(gimbal, 0.0, np.arctan2(R_hat[:, 2, 1], R_hat[:, 2, 2]))

    # windowed excitation metric (window rounded to whole logging steps)
    if spec.excitation == "reference":
        d = _unit_rows(refs[:, :, spec.ref_indices[0]])
        G = d[:, :, None] * d[:, None, :]
    else:
        A = spec.axes if spec.kind == "scalar" else np.eye(3)
        G = (R_tru @ (A @ A.T)) @ R_tru_T
    w = max(1, int(round(cfg.pe_window / dt)))
    avg = np.empty_like(G)
    avg[0] = G[0]
    if L > 1:
        seg = 0.5 * dt * (G[:-1] + G[1:])
        C = np.concatenate([np.zeros((1, 3, 3)), np.cumsum(seg, axis=0)])
        head = min(w, L)
        if head > 1:
            avg[1:head] = C[1:head] / t_log[1:head, None, None]
        if L > w:
            avg[w:] = (C[w:] - C[:-w]) / (w * dt)
    mu = analysis.eigvals_sym3(avg)[:, 1]

    mode = spec.diagnostics
    eps_cert = scenarios.certified_epsilon(cfg)
    if mode == "two-refs":
        a = spec.axes[:, 0] / np.linalg.norm(spec.axes[:, 0])
        b1 = refs[0, :, spec.ref_indices[0]]
        b2 = refs[0, :, spec.ref_indices[1]]
        n = np.cross(b1, b2)
        n /= np.linalg.norm(n)
        dvec = np.einsum("lji,j->li", R_tru, n)
        eps_t = np.linalg.norm(np.cross(np.broadcast_to(a, (L, 3)), dvec), axis=1)
    elif mode == "two-axes":
        na = np.cross(spec.axes[:, 0], spec.axes[:, 1])
        na /= np.linalg.norm(na)
        bh = _unit_rows(refs[:, :, spec.ref_indices[0]])
        dvec = np.einsum("lji,lj->li", R_tru, bh)
        eps_t = np.linalg.norm(np.cross(np.broadcast_to(na, (L, 3)), dvec), axis=1)
    else:
        eps_t = np.full(L, np.nan)

    if mode in ("two-refs", "two-axes") and eps_cert is not None and eps_cert < 1.0:
        theta_star = analysis.solve_theta_star(eps_cert)
        margin = np.cos(0.5 * theta) * np.cos(theta) - eps_cert
        inside = (tr >= 1.0 + 2.0 * math.cos(theta_star)).astype(np.int64)
    else:
        margin = np.full(L, np.nan)
        inside = np.ones(L, dtype=np.int64)

    if mode == "common-axes":
        Qp = axes_factorization(SensorChannel(np.array([0.0, 0.0, 1.0]), spec.axes)).projector
        P = (R_tru @ Qp) @ R_tru_T
        Rt2 = Rt @ Rt
        V0 = -k * (np.einsum("lii->l", P) - np.einsum("lij,lji->l", P, Rt2))
        V_E = np.zeros(L)
    elif mode == "classical":
        B = _unit_rows(
            np.swapaxes(refs[:, :, list(spec.ref_indices)], 1, 2).reshape(-1, 3)
        ).reshape(L, len(spec.ref_indices), 3)
        Sbar = np.einsum("lpi,lpj->lij", B, B)
        Rt2 = Rt @ Rt
        V0 = -k * (np.einsum("lii->l", Sbar) - np.einsum("lij,lji->l", Sbar, Rt2))
        V_E = np.zeros(L)
    elif mode == "two-refs":
        x = np.einsum("lij,j->li", R_hat, a)
        y = np.einsum("lij,j->li", R_tru, a)
        Rt2 = Rt @ Rt
        z = np.einsum("lij,lj->li", Rt2, y)
        d1 = x - y
        d2 = z - y
        ydd = np.einsum("li,li->l", y, d2)
        ndd = d2 @ n
        V0 = -k * np.einsum("li,li->l", d1, d2 - y * ydd[:, None])
        V_E = -k * np.einsum("li,li->l", d1, y * ydd[:, None] - n[None, :] * ndd[:, None])
    else:  # two-axes
        x = np.einsum("lji,lj->li", Rt, bh)
        z = np.einsum("lji,lj->li", Rt, x)
        nl = np.einsum("lij,j->li", R_tru, na)
        d1 = x - bh
        d2 = z - bh
        ydd = np.einsum("li,li->l", bh, d2)
        ndd = np.einsum("li,li->l", nl, d2)
        V0 = -k * np.einsum("li,li->l", d1, d2 - bh * ydd[:, None])
        V_E = -k * np.einsum("li,li->l", d1, bh * ydd[:, None] - nl * ndd[:, None])

    vdn = np.empty(L)
    if L > 1:
        vdn[1:-1] = (V[2:] - V[:-2]) / (2.0 * dt)
        vdn[0] = (V[1] - V[0]) / dt
        vdn[-1] = (V[-1] - V[-2]) / dt
    else:
        vdn[0] = 0.0

    deg = 180.0 / math.pi
    return {
        "t": t_log,
        "theta_tilde_deg": theta * deg,
        "V": V,
        "mu_hat": mu,
        "epsilon_value": eps_t,
        "margin": margin,
        "inside_basin": inside,
        "V_dot_numeric": vdn,
        "V0": V0,
        "V_E": V_E,
        "yaw_deg": yaw * deg,
        "pitch_deg": pitch * deg,
        "roll_deg": roll * deg,
    }


def _resolve_variants(cfg, variants) -> list[VariantSpec]:
    specs = scenarios.variants_for(cfg)
    if variants is None:
        return list(specs.values())
    out = []
    for name in variants:
        if name not in specs:
            raise scenarios.IncompatibleVariantError(
                f"variant {name!r} not available for family {cfg.family!r}"
                f" (choose from {sorted(specs)})"
            )
        out.append(specs[name])
    return out


def _run_iter(cfg: ScenarioConfig, variants) -> Iterator[tuple[RunRecord, float]]:
    if not is_rotation(cfg.r0_hat, tol=1e-6):
        raise ValueError("r0_hat is not a rotation matrix")
    chosen = _resolve_variants(cfg, variants)
    nodes, log_idx = _node_grid(cfg)
    stage_t = _stage_times(nodes)
    tr = scenarios.truth_arrays(cfg, stage_t)
    noise_nodes = None
    if cfg.noise_std > 0.0:
        rng = np.random.default_rng(cfg.seed)
        noise_nodes = rng.standard_normal((nodes.size, tr.refs.shape[2], 3))
    noise = _stage_noise(noise_nodes, stage_t.size)
    h = np.diff(nodes)
    t_log = nodes[log_idx]
    stage_log = 2 * log_idx  # stage index of each logging node
    R_tru_log = tr.R[stage_log]
    refs_log = tr.refs[stage_log]
    for spec in chosen:
        t0 = time.perf_counter()
        if spec.kind == "scalar":
            b, c, m, Q = _scalar_tables(cfg, spec, tr, noise)
        else:
            b, c, m, Q = _vector_tables(cfg, spec, tr, noise)
        out = integrate(np.asarray(cfg.r0_hat, dtype=float), spec.gain(cfg), h, tr.Omega, b, c, m, Q)
        if not np.isfinite(out).all():
            bad = np.flatnonzero(~np.isfinite(out.reshape(out.shape[0], -1)).all(axis=1))[0]
            raise NonFiniteStateError(
                f"non-finite estimate in variant {spec.name!r} at t = {nodes[bad]:.6f} s"
            )
        R_hat = out[log_idx]
        cols = _diagnostic_columns(cfg, spec, t_log, R_tru_log, refs_log, R_hat)
        record = RunRecord(scenario=cfg.scenario, variant=spec.name, R_hat=R_hat, **cols)
        yield record, time.perf_counter() - t0


def run(cfg: ScenarioConfig, variants=None) -> list[RunRecord]:
    """Run the scenario for the requested variants (default: all compatible).

    Returns one :class:`RunRecord` per variant, in request order.
    """
    return [record for record, _ in _run_iter(cfg, variants)]


def _verdict(spec_mode_known: bool, record: RunRecord) -> dict:
    dv = np.diff(record.V)
    verdict = {
        "rows": record.n_rows,
        "final_theta_tilde_deg": float(record.theta_tilde_deg[-1]),
        "max_step_v_increase": float(dv.max()) if dv.size else 0.0,
        "min_mu_hat": float(record.mu_hat.min()),
    }
    if spec_mode_known:
        flips = np.flatnonzero(np.diff(record.inside_basin) < 0)
        verdict["basin_held"] = bool(flips.size == 0)
    else:
        verdict["basin_held"] = None
    return verdict


def timed_run(cfg: ScenarioConfig, variants=None) -> tuple[list[RunRecord], RunManifest]:
    """Like :func:`run`, additionally returning a provenance manifest."""
    records: list[RunRecord] = []
    wall: dict[str, float] = {}
    for record, elapsed in _run_iter(cfg, variants):
        records.append(record)
        wall[record.variant] = round(elapsed, 6)
    specs = scenarios.variants_for(cfg)
    verdicts = {
        r.variant: _verdict(specs[r.variant].diagnostics in ("two-refs", "two-axes"), r)
        for r in records
    }
    try:
        from . import __version__ as version
    except ImportError:  # pragma: no cover
        version = "unknown"
    manifest = RunManifest(
        version=version,
        scenario=cfg.scenario,
        family=cfg.family,
        config_digest=config_digest(cfg),
        seed=cfg.seed,
        noise_std=cfg.noise_std,
        dt=cfg.dt,
        duration=cfg.duration,
        variants=tuple(r.variant for r in records),
        wall_time_s=wall,
        verdicts=verdicts,
        created_utc=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )
    return records, manifest


def emit_csv(record: RunRecord, path) -> None:
    """Write the record's columns as CSV (full precision, bit-exact round trip)."""
    fmt = ["%.17g"] * len(CSV_COLUMNS)
    fmt[CSV_COLUMNS.index("inside_basin")] = "%d"
    np.savetxt(
        path,
        record.table(),
        fmt=",".join(fmt),
        header=",".join(CSV_COLUMNS),
        comments="",
    )


def load_csv(path) -> dict[str, np.ndarray]:
    """Read a CSV written by :func:`emit_csv` into named column arrays."""
    with open(path) as fh:
        header = fh.readline().strip()
        names = header.split(",") if header else []
        rows = [line.split(",") for line in fh if line.strip()]
    if names != list(CSV_COLUMNS):
        raise ValueError(f"unexpected CSV header: {header!r}")
    data = np.asarray([[float(x) for x in row] for row in rows], dtype=float)
    data = data.reshape(-1, len(CSV_COLUMNS))
    out = {name: data[:, i].copy() for i, name in enumerate(CSV_COLUMNS)}
    out["inside_basin"] = out["inside_basin"].astype(np.int64)
    return out


def warmup() -> None:
    """Trigger the compiled kernel once so later timings exclude compilation."""
    cfg = scenarios.sim3_config(duration=0.01, dt=0.005)
    run(cfg, ["scalar-2", "vector-baseline"])
