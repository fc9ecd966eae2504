"""Minimal self-contained SVG plots.

Output is a pure function of the inputs (fixed number formatting, no
timestamps or random ids) so files can be diffed byte for byte.
"""
from __future__ import annotations

from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 64, 150, 36, 48
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(t) for t in np.arange(start, hi + step * 1e-9, step)]


def _label(x: float) -> str:
    return f"{x:.6g}"


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x0, self.x1 = self.x0 - 0.5, self.x0 + 0.5
        if self.y1 <= self.y0:
            self.y0, self.y1 = self.y0 - 0.5, self.y0 + 0.5

    def px(self, x):
        return LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)

    def py(self, y):
        return HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)


def _header(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
    ]


def _axes(f: _Frame, xlabel: str, ylabel: str) -> list[str]:
    out = [f'<rect x="{LEFT}" y="{TOP}" width="{WIDTH - LEFT - RIGHT}" '
           f'height="{HEIGHT - TOP - BOTTOM}" fill="none" stroke="black"/>']
    for t in _ticks(f.x0, f.x1):
        x = _fmt(f.px(t))
        out.append(f'<line x1="{x}" y1="{HEIGHT - BOTTOM}" x2="{x}" y2="{HEIGHT - BOTTOM + 4}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{HEIGHT - BOTTOM + 16}" text-anchor="middle">{_label(t)}</text>')
    for t in _ticks(f.y0, f.y1):
        y = _fmt(f.py(t))
        out.append(f'<line x1="{LEFT - 4}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 7}" y="{y}" text-anchor="end" dominant-baseline="middle">{_label(t)}</text>')
    out.append(f'<text x="{(LEFT + WIDTH - RIGHT) / 2:.1f}" y="{HEIGHT - 10}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{(TOP + HEIGHT - BOTTOM) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(TOP + HEIGHT - BOTTOM) / 2:.1f})">{escape(ylabel)}</text>')
    return out


def line_plot(series: Sequence[tuple], title: str = "", xlabel: str = "", ylabel: str = "",
              hline: Optional[float] = None, ylim: Optional[tuple] = None, markers: bool = True) -> str:
    """Overlay of ``(name, xs, ys)`` curves, optionally with a dashed horizontal reference."""
    xs_all = np.concatenate([np.asarray(s[1], float) for s in series]) if series else np.zeros(1)
    ys_all = np.concatenate([np.asarray(s[2], float) for s in series]) if series else np.zeros(1)
    if ylim is None:
        lo, hi = float(ys_all.min()), float(ys_all.max())
        if hline is not None:
            lo, hi = min(lo, hline), max(hi, hline)
        ylim = (lo, hi)
    f = _Frame((float(xs_all.min()), float(xs_all.max())), ylim)
    out = _header(title) + _axes(f, xlabel, ylabel)
    if hline is not None:
        y = _fmt(f.py(hline))
        out.append(f'<line x1="{LEFT}" y1="{y}" x2="{WIDTH - RIGHT}" y2="{y}" stroke="gray" '
                   f'stroke-dasharray="5,4"/>')
    for k, (name, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{_fmt(f.px(x))},{_fmt(f.py(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if markers:
            out.extend(f'<circle cx="{_fmt(f.px(x))}" cy="{_fmt(f.py(y))}" r="2.5" fill="{color}"/>'
                       for x, y in zip(xs, ys))
        ly = TOP + 14 * k + 8
        out.append(f'<line x1="{WIDTH - RIGHT + 10}" y1="{ly}" x2="{WIDTH - RIGHT + 28}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{WIDTH - RIGHT + 32}" y="{ly}" dominant-baseline="middle">{escape(str(name))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter3d(points: np.ndarray, title: str = "", elev: float = 25.0, azim: float = -60.0) -> str:
    """Orthographic view of ``N x 3`` points from the given elevation/azimuth (degrees)."""
    P = np.asarray(points, dtype=float)
    a, e = np.radians(azim), np.radians(elev)
    right = np.array([np.cos(a), np.sin(a), 0.0])
    up = np.array([-np.sin(a) * np.sin(e), np.cos(a) * np.sin(e), np.cos(e)])
    X, Y = P @ right, P @ up
    f = _Frame((float(X.min()), float(X.max())), (float(Y.min()), float(Y.max())))
    out = _header(title) + _axes(f, "view x", "view y")
    depth = P @ np.cross(right, up)
    for k in np.argsort(depth, kind="stable"):
        out.append(f'<circle cx="{_fmt(f.px(X[k]))}" cy="{_fmt(f.py(Y[k]))}" r="2" '
                   f'fill="{PALETTE[0]}" fill-opacity="0.6"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
