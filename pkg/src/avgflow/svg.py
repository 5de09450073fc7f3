"""Static SVG line plots in a fixed 800x600 viewport, no plotting library.

One public function, :func:`line_plot`, draws labeled curves as polylines
over log- or linear-mapped data with ticks, axis labels, and a legend.
Output is deterministic: fixed decimal formatting, stable ordering, no
timestamps, so byte-identical inputs give byte-identical files.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence, Tuple

import numpy as np

WIDTH = 800
HEIGHT = 600
MARGIN_LEFT = 80
MARGIN_RIGHT = 24
MARGIN_TOP = 48
MARGIN_BOTTOM = 56
# values at or below this are clamped before log mapping; presentation only
LOG_FLOOR = 1e-20
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")

Curve = Tuple[str, Sequence[float], Sequence[float]]


def _escape(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _tick_label(x: float) -> str:
    if x != 0.0 and (abs(x) >= 1e4 or abs(x) < 1e-3):
        return f"{x:.0e}"
    return f"{x:g}"


def _log_ticks(lo: float, hi: float) -> list:
    first = int(math.floor(math.log10(lo)))
    last = int(math.ceil(math.log10(hi)))
    decades = list(range(first, last + 1))
    stride = max(1, (len(decades) + 9) // 10)
    return [10.0 ** d for d in decades[::stride]]


def _linear_ticks(lo: float, hi: float, count: int = 6) -> list:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(count - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(m for m in (mag, 2 * mag, 5 * mag, 10 * mag) if m >= raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks or [lo]


class _Axis:
    """Maps data coordinates to pixels, optionally through log10."""

    def __init__(self, lo: float, hi: float, log: bool):
        self.log = log
        if log:
            lo, hi = math.log10(lo), math.log10(hi)
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5
        self.lo, self.hi = lo, hi

    def unit(self, value: float) -> float:
        v = math.log10(value) if self.log else value
        return (v - self.lo) / (self.hi - self.lo)


def _prepare(curves: Iterable[Curve], log_x: bool, log_y: bool) -> list:
    """Mask curves down to plottable points (finite; positive on log axes)."""
    kept = []
    for label, xs, ys in curves:
        x = np.asarray(xs, dtype=float)
        y = np.asarray(ys, dtype=float)
        if x.shape != y.shape:
            raise ValueError(f"curve {label!r} has mismatched x/y lengths")
        if log_y:
            y = np.maximum(y, LOG_FLOOR)
        mask = np.isfinite(x) & np.isfinite(y)
        if log_x:
            mask &= x > 0.0
        x, y = x[mask], y[mask]
        if x.size >= 2:
            kept.append((str(label), x, y))
    return kept


def line_plot(curves: Iterable[Curve], title: str = "", xlabel: str = "s",
              ylabel: str = "", log_x: bool = False, log_y: bool = True) -> str:
    """Render labeled (x, y) curves as an 800x600 SVG document.

    Parameters
    ----------
    curves : iterable of (label, xs, ys)
        Plotted in order with a fixed color palette.  Non-finite points
        are dropped; on a log y-axis, values are clamped at 1e-20 so
        flat-zero channels still draw as flat floor lines.
    title, xlabel, ylabel : str
        Annotations; escaped for SVG.
    log_x, log_y : bool
        Axis scaling; ticks land on decades for log axes.

    Returns the SVG text.  Raises ValueError when no curve has at least
    two plottable points.
    """
    kept = _prepare(curves, log_x, log_y)
    if not kept:
        raise ValueError("no curve has two plottable points")

    x_lo = min(float(np.min(x)) for _, x, _ in kept)
    x_hi = max(float(np.max(x)) for _, x, _ in kept)
    y_lo = min(float(np.min(y)) for _, _, y in kept)
    y_hi = max(float(np.max(y)) for _, _, y in kept)
    ax_x = _Axis(x_lo, x_hi, log_x)
    ax_y = _Axis(y_lo, y_hi, log_y)

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(value: float) -> float:
        return MARGIN_LEFT + ax_x.unit(value) * plot_w

    def py(value: float) -> float:
        return MARGIN_TOP + (1.0 - ax_y.unit(value)) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH // 2}" y="28" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{_escape(title)}</text>',
    ]

    x_ticks = (_log_ticks(10.0 ** ax_x.lo, 10.0 ** ax_x.hi) if log_x
               else _linear_ticks(ax_x.lo, ax_x.hi))
    y_ticks = (_log_ticks(10.0 ** ax_y.lo, 10.0 ** ax_y.hi) if log_y
               else _linear_ticks(ax_y.lo, ax_y.hi))
    for t in x_ticks:
        gx = _fmt(px(t))
        out.append(f'<line x1="{gx}" y1="{MARGIN_TOP}" x2="{gx}" '
                   f'y2="{MARGIN_TOP + plot_h}" stroke="#dddddd"/>')
        out.append(f'<text x="{gx}" y="{MARGIN_TOP + plot_h + 18}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{_tick_label(t)}</text>')
    for t in y_ticks:
        gy = _fmt(py(t))
        out.append(f'<line x1="{MARGIN_LEFT}" y1="{gy}" '
                   f'x2="{MARGIN_LEFT + plot_w}" y2="{gy}" stroke="#dddddd"/>')
        out.append(f'<text x="{MARGIN_LEFT - 6}" y="{gy}" text-anchor="end" '
                   f'dominant-baseline="middle" font-family="sans-serif" '
                   f'font-size="11">{_tick_label(t)}</text>')

    out.append(f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" '
               f'height="{plot_h}" fill="none" stroke="#333333"/>')
    out.append(f'<text x="{MARGIN_LEFT + plot_w // 2}" y="{HEIGHT - 14}" '
               f'text-anchor="middle" font-family="sans-serif" '
               f'font-size="13">{_escape(xlabel)}</text>')
    out.append(f'<text x="20" y="{MARGIN_TOP + plot_h // 2}" '
               f'text-anchor="middle" font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 20 {MARGIN_TOP + plot_h // 2})">'
               f'{_escape(ylabel)}</text>')

    for i, (label, x, y) in enumerate(kept):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{points}"/>')
        ly = MARGIN_TOP + 14 + 18 * i
        lx = MARGIN_LEFT + plot_w - 150
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 30}" y="{ly}" font-family="sans-serif" '
                   f'font-size="12">{_escape(label)}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
