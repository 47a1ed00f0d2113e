"""Flat ``key = value`` config files for scenario runs.

One assignment per line, ``#`` comments, blank lines ignored.  Keys mirror
ScenarioConfig field names.  Angle fields accept a ``deg`` suffix (``psi0 =
30 deg``); bare numbers are radians.  ``r0_hat`` is nine row-major floats on
one line and must form a rotation matrix.
"""
from __future__ import annotations

import math

import numpy as np

from . import so3
from .scenarios import ScenarioConfig

__all__ = ["ConfigError", "parse_config", "load_config", "format_config"]

_STR_FIELDS = frozenset({"scenario", "family"})
_INT_FIELDS = frozenset({"seed"})
_ANGLE_FIELDS = frozenset(
    {"psi0", "phi0", "alpha_max", "beta_max", "gamma_dip", "gamma_tilt", "phi_spread"}
)
_MATRIX_FIELDS = frozenset({"r0_hat"})
_FLOAT_FIELDS = frozenset(
    {
        "duration",
        "dt",
        "k_scalar",
        "k_vector",
        "pe_window",
        "noise_std",
        "omega",
        "omega_alpha",
        "omega_beta",
        "v_speed",
    }
)
_ALL_FIELDS = _STR_FIELDS | _INT_FIELDS | _ANGLE_FIELDS | _MATRIX_FIELDS | _FLOAT_FIELDS


class ConfigError(ValueError):
    """Config file did not parse; message carries source and line number."""


def _fail(source: str, lineno: int, msg: str) -> None:
    raise ConfigError(f"{source}:{lineno}: {msg}")


def _parse_value(key: str, raw: str, source: str, lineno: int):
    if key in _STR_FIELDS:
        if not raw or " " in raw:
            _fail(source, lineno, f"field {key!r} expects a single word, got {raw!r}")
        return raw
    if key in _INT_FIELDS:
        try:
            return int(raw, 0)
        except ValueError:
            _fail(source, lineno, f"field {key!r} expects an integer, got {raw!r}")
    if key in _MATRIX_FIELDS:
        toks = raw.split()
        if len(toks) != 9:
            _fail(source, lineno, f"field {key!r} expects 9 floats, got {len(toks)}")
        try:
            R = np.array([float(t) for t in toks]).reshape(3, 3)
        except ValueError:
            _fail(source, lineno, f"field {key!r} has a non-numeric entry")
        if not so3.is_rotation(R, tol=1e-6):
            _fail(source, lineno, f"field {key!r} is not a rotation matrix")
        return R
    toks = raw.split()
    if key in _ANGLE_FIELDS and len(toks) == 2 and toks[1] in ("deg", "rad"):
        try:
            val = float(toks[0])
        except ValueError:
            _fail(source, lineno, f"field {key!r} expects a number, got {toks[0]!r}")
        return math.radians(val) if toks[1] == "deg" else val
    if len(toks) != 1:
        _fail(source, lineno, f"field {key!r} expects a single number, got {raw!r}")
    try:
        return float(toks[0])
    except ValueError:
        _fail(source, lineno, f"field {key!r} expects a number, got {raw!r}")


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse config text into a field -> value dict (only keys present)."""
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            _fail(source, lineno, f"expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _ALL_FIELDS:
            _fail(source, lineno, f"unknown field {key!r}")
        if key in out:
            _fail(source, lineno, f"duplicate field {key!r}")
        out[key] = _parse_value(key, raw, source, lineno)
    return out


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    return parse_config(text, source=str(path))


def format_config(cfg: ScenarioConfig) -> str:
    """Render a config that parses back to exactly the same values."""
    lines = [
        f"scenario = {cfg.scenario}",
        f"family = {cfg.family}",
    ]
    order = (
        "duration",
        "dt",
        "k_scalar",
        "k_vector",
        "pe_window",
        "noise_std",
        "seed",
        "psi0",
        "phi0",
        "omega",
        "omega_alpha",
        "omega_beta",
        "alpha_max",
        "beta_max",
        "gamma_dip",
        "gamma_tilt",
        "phi_spread",
        "v_speed",
    )
    for name in order:
        val = getattr(cfg, name)
        lines.append(f"{name} = {val:d}" if name == "seed" else f"{name} = {val:.17g}")
    flat = " ".join(f"{v:.17g}" for v in np.asarray(cfg.r0_hat).ravel())
    lines.append(f"r0_hat = {flat}")
    return "\n".join(lines) + "\n"
