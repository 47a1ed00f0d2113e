"""Static SVG line charts of attitude error versus time.

Hand-rolled SVG so chart output never pulls in a plotting dependency.  Output
bytes are a pure function of the input records: same data, same file.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .engine import RunRecord

__all__ = ["EmptyInputError", "emit_chart"]

# fixed palette, one stroke per variant in record order
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_WIDTH, _HEIGHT = 880.0, 520.0
_ML, _MR, _MT, _MB = 70.0, 190.0, 30.0, 55.0
_MAX_POINTS = 2000


class EmptyInputError(ValueError):
    """emit_chart was called with no records."""


def _nice_step(span: float, target: int) -> float:
    raw = span / max(target, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if mult * mag >= raw:
            return mult * mag
    return 10.0 * mag


def _ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if not hi > lo:
        hi = lo + 1.0
    step = _nice_step(hi - lo, target)
    first = math.ceil(lo / step - 1e-9) * step
    out = []
    v = first
    while v <= hi + 1e-9 * step:
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _downsample(n: int) -> np.ndarray:
    """Index subset of size <= _MAX_POINTS that always keeps both endpoints."""
    if n <= _MAX_POINTS:
        return np.arange(n)
    idx = np.linspace(0, n - 1, _MAX_POINTS)
    return np.unique(np.round(idx).astype(int))


def emit_chart(records: Sequence[RunRecord] | Iterable[RunRecord], path) -> None:
    """Write an SVG of theta_tilde_deg vs t with one polyline per record.

    Raises EmptyInputError when no records are given.
    """
    records = list(records)
    if not records:
        raise EmptyInputError("emit_chart needs at least one run record")

    t_lo = min(float(r.t[0]) for r in records)
    t_hi = max(float(r.t[-1]) for r in records)
    y_lo = 0.0
    y_hi = max(float(np.max(r.theta_tilde_deg)) for r in records)
    if not y_hi > y_lo:
        y_hi = y_lo + 1.0
    y_hi *= 1.05
    if not t_hi > t_lo:
        t_hi = t_lo + 1.0

    px_w = _WIDTH - _ML - _MR
    px_h = _HEIGHT - _MT - _MB

    def sx(t):
        return _ML + (t - t_lo) / (t_hi - t_lo) * px_w

    def sy(y):
        return _MT + (y_hi - y) / (y_hi - y_lo) * px_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(_WIDTH)}" '
        f'height="{_fmt(_HEIGHT)}" viewBox="0 0 {_fmt(_WIDTH)} {_fmt(_HEIGHT)}">',
        f'<rect width="{_fmt(_WIDTH)}" height="{_fmt(_HEIGHT)}" fill="white"/>',
        '<g font-family="sans-serif" font-size="13" fill="#333">',
    ]

    # axes frame
    x0, x1 = _ML, _ML + px_w
    y0, y1 = _MT + px_h, _MT
    parts.append(
        f'<path d="M {_fmt(x0)} {_fmt(y1)} L {_fmt(x0)} {_fmt(y0)} '
        f'L {_fmt(x1)} {_fmt(y0)}" stroke="#333" fill="none" stroke-width="1"/>'
    )

    for tv in _ticks(t_lo, t_hi):
        x = sx(tv)
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{_fmt(y0)}" x2="{_fmt(x)}" '
            f'y2="{_fmt(y0 + 5)}" stroke="#333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y0 + 20)}" '
            f'text-anchor="middle">{_fmt(tv)}</text>'
        )
    for yv in _ticks(y_lo, y_hi):
        y = sy(yv)
        parts.append(
            f'<line x1="{_fmt(x0 - 5)}" y1="{_fmt(y)}" x2="{_fmt(x0)}" '
            f'y2="{_fmt(y)}" stroke="#333" stroke-width="1"/>'
        )
        parts.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(y)}" x2="{_fmt(x1)}" '
            f'y2="{_fmt(y)}" stroke="#ddd" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{_fmt(x0 - 9)}" y="{_fmt(y + 4)}" '
            f'text-anchor="end">{_fmt(yv)}</text>'
        )

    parts.append(
        f'<text x="{_fmt(_ML + px_w / 2)}" y="{_fmt(_HEIGHT - 12)}" '
        f'text-anchor="middle">t (s)</text>'
    )
    parts.append(
        f'<text x="18" y="{_fmt(_MT + px_h / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_fmt(_MT + px_h / 2)})">'
        "attitude error (deg)</text>"
    )

    for i, rec in enumerate(records):
        color = _PALETTE[i % len(_PALETTE)]
        idx = _downsample(rec.n_rows)
        pts = " ".join(
            f"{_fmt(sx(rec.t[j]))},{_fmt(sy(rec.theta_tilde_deg[j]))}" for j in idx
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.6"/>'
        )
        # legend entry
        ly = _MT + 14 + 22 * i
        lx = _ML + px_w + 18
        parts.append(
            f'<line x1="{_fmt(lx)}" y1="{_fmt(ly)}" x2="{_fmt(lx + 26)}" '
            f'y2="{_fmt(ly)}" stroke="{color}" stroke-width="1.6"/>'
        )
        label = f"{rec.scenario} {rec.variant}"
        parts.append(f'<text x="{_fmt(lx + 32)}" y="{_fmt(ly + 4)}">{label}</text>')

    parts.append("</g>")
    parts.append("</svg>")
    data = "\n".join(parts) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(data)
