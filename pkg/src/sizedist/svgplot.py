"""Minimal self-contained SVG line plots (no plotting dependency).

Each rendered series can carry a `source` pointer naming the TSV column it
was drawn from; the pointers are embedded in the figure's <desc> element so a
plot can always be traced back to its data files.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    name: str
    x: np.ndarray
    y: np.ndarray
    color: str = ""
    kind: str = "line"  # "line" or "points"
    source: str = ""


def _nice_step(span: float, n: int) -> float:
    raw = span / max(n - 1, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            return mult * mag
    return 10.0 * mag


def _ticks(lo: float, hi: float, n: int = 6) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    step = _nice_step(hi - lo, n)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + 0.5 * step, step)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_plot_svg(
    series: list[Series],
    title: str,
    xlabel: str,
    ylabel: str,
    width: int = 720,
    height: int = 480,
) -> str:
    ml, mr, mt, mb = 64, 18, 40, 52
    pw, ph = width - ml - mr, height - mt - mb

    finite_x, finite_y = [], []
    for s in series:
        ok = np.isfinite(s.x) & np.isfinite(s.y)
        if np.any(ok):
            finite_x.append(s.x[ok])
            finite_y.append(s.y[ok])
    if not finite_x:
        raise ValueError("nothing finite to plot")
    ax = np.concatenate(finite_x)
    ay = np.concatenate(finite_y)
    x_lo, x_hi = float(ax.min()), float(ax.max())
    y_lo, y_hi = float(ay.min()), float(ay.max())
    x_pad = 0.04 * (x_hi - x_lo or 1.0)
    y_pad = 0.04 * (y_hi - y_lo or 1.0)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def px(v):
        return ml + (v - x_lo) / (x_hi - x_lo) * pw

    def py(v):
        return mt + ph - (v - y_lo) / (y_hi - y_lo) * ph

    sources = ", ".join(s.source for s in series if s.source)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<desc>sources: {escape(sources)}</desc>",
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{escape(title)}</text>',
    ]

    for tx in _ticks(x_lo + x_pad, x_hi - x_pad):
        parts.append(
            f'<line x1="{px(tx):.2f}" y1="{mt + ph}" x2="{px(tx):.2f}" '
            f'y2="{mt + ph + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px(tx):.2f}" y="{mt + ph + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(tx)}</text>'
        )
    for ty in _ticks(y_lo + y_pad, y_hi - y_pad):
        parts.append(
            f'<line x1="{ml - 5}" y1="{py(ty):.2f}" x2="{ml}" y2="{py(ty):.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{ml - 8}" y="{py(ty):.2f}" text-anchor="end" dominant-baseline="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(ty)}</text>'
        )
    parts.append(
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>'
    )
    parts.append(
        f'<text x="{ml + pw / 2:.0f}" y="{height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{escape(xlabel)}</text>'
    )
    parts.append(
        f'<text x="16" y="{mt + ph / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 16 {mt + ph / 2:.0f})">{escape(ylabel)}</text>'
    )

    for idx, s in enumerate(series):
        color = s.color or PALETTE[idx % len(PALETTE)]
        ok = np.isfinite(s.x) & np.isfinite(s.y)
        xs = s.x[ok]
        ys = s.y[ok]
        if xs.size == 0:
            continue
        if s.kind == "points":
            # cap marker count so large samples do not bloat the file
            if xs.size > 500:
                pick = np.unique(np.round(np.linspace(0, xs.size - 1, 500)).astype(int))
                xs, ys = xs[pick], ys[pick]
            for xv, yv in zip(xs, ys):
                parts.append(
                    f'<circle cx="{px(xv):.2f}" cy="{py(yv):.2f}" r="2.2" '
                    f'fill="{color}" fill-opacity="0.7"/>'
                )
        else:
            pts = " ".join(f"{px(xv):.2f},{py(yv):.2f}" for xv, yv in zip(xs, ys))
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"/>'
            )

    ly = mt + 14
    for idx, s in enumerate(series):
        color = s.color or PALETTE[idx % len(PALETTE)]
        parts.append(
            f'<line x1="{ml + pw - 130}" y1="{ly}" x2="{ml + pw - 108}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2.5"/>'
        )
        parts.append(
            f'<text x="{ml + pw - 102}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="11">{escape(s.name)}</text>'
        )
        ly += 16

    parts.append("</svg>")
    return "\n".join(parts)
