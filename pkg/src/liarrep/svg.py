"""Minimal deterministic SVG line plots (no plotting library involved)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

WIDTH, HEIGHT = 720, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 24, 36, 52
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str = ""
    color: str = PALETTE[0]
    dashed: bool = False
    width: float = 1.5
    step: bool = False  # draw as a staircase (piecewise-constant path)


@dataclass
class Figure:
    title: str
    xlabel: str
    ylabel: str
    xlim: tuple[float, float]
    ylim: tuple[float, float] = (0.0, 1.0)
    series: list[Series] = field(default_factory=list)
    hlines: list[tuple[float, str, str]] = field(default_factory=list)  # (y, label, color)

    def add(self, *args, **kwargs) -> None:
        self.series.append(Series(*args, **kwargs))

    def render(self) -> str:
        return render(self)


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / n for i in range(n + 1)]


def _tick_label(v: float) -> str:
    return f"{v:.6g}"


def thin(x, y, max_points: int = 4000):
    """Stride-subsample long series; always keeps the last point."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) <= max_points:
        return x, y
    stride = -(-len(x) // max_points)
    idx = np.arange(0, len(x), stride)
    if idx[-1] != len(x) - 1:
        idx = np.append(idx, len(x) - 1)
    return x[idx], y[idx]


def render(fig: Figure) -> str:
    x0, x1 = fig.xlim
    y0, y1 = fig.ylim
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B
    xspan = (x1 - x0) or 1.0
    yspan = (y1 - y0) or 1.0

    def sx(v):
        return MARGIN_L + (np.asarray(v, dtype=float) - x0) / xspan * pw

    def sy(v):
        return MARGIN_T + ph - (np.asarray(v, dtype=float) - y0) / yspan * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.2f}" y="20" text-anchor="middle" font-size="14">{_esc(fig.title)}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _ticks(x0, x1):
        px = float(sx(v))
        out.append(f'<line x1="{px:.2f}" y1="{MARGIN_T + ph}" x2="{px:.2f}" y2="{MARGIN_T + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{MARGIN_T + ph + 18}" text-anchor="middle">{_tick_label(v)}</text>')
    for v in _ticks(y0, y1):
        py = float(sy(v))
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{py:.2f}" x2="{MARGIN_L}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{py + 4:.2f}" text-anchor="end">{_tick_label(v)}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle">{_esc(fig.xlabel)}</text>')
    out.append(f'<text x="16" y="{MARGIN_T + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.2f})">{_esc(fig.ylabel)}</text>')
    out.append(f'<clipPath id="plot"><rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}"/></clipPath>')
    out.append('<g clip-path="url(#plot)">')
    for y, label, color in fig.hlines:
        py = float(sy(y))
        out.append(f'<line x1="{MARGIN_L}" y1="{py:.2f}" x2="{MARGIN_L + pw}" y2="{py:.2f}" '
                   f'stroke="{color}" stroke-width="1" stroke-dasharray="2,3"/>')
    for s in fig.series:
        xs, ys = np.asarray(s.x, dtype=float), np.asarray(s.y, dtype=float)
        if len(xs) == 0:
            continue
        if s.step and len(xs) > 1:
            xs = np.repeat(xs, 2)[1:]
            ys = np.repeat(ys, 2)[:-1]
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(sx(xs).tolist(), sy(ys).tolist()))
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{s.color}" '
                   f'stroke-width="{s.width}"{dash}/>')
    out.append("</g>")
    for y, label, color in fig.hlines:
        if label:
            out.append(f'<text x="{MARGIN_L + pw - 4}" y="{float(sy(y)) - 4:.2f}" text-anchor="end" '
                       f'fill="{color}">{_esc(label)}</text>')
    ly = MARGIN_T + 14
    seen = set()
    for s in fig.series:
        if not s.label or s.label in seen:
            continue
        seen.add(s.label)
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        out.append(f'<line x1="{MARGIN_L + 10}" y1="{ly - 4}" x2="{MARGIN_L + 34}" y2="{ly - 4}" '
                   f'stroke="{s.color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{MARGIN_L + 40}" y="{ly}">{_esc(s.label)}</text>')
        ly += 16
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
