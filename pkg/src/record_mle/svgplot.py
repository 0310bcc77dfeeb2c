"""Minimal self-contained SVG line charts (no plotting dependency)."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=80, right=170, top=40, bottom=60)
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"]


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_chart(
    x: Sequence[float],
    series: dict[str, Sequence[float]],
    title: str,
    xlabel: str,
    ylabel: str,
    log_y: bool = False,
) -> str:
    """Render one or more y-series against a shared x axis.

    Non-finite points (and non-positive points on a log axis) break the line.
    """
    xs = [float(v) for v in x]
    tf = (lambda v: math.log10(v)) if log_y else (lambda v: v)

    def usable(v) -> bool:
        return v is not None and math.isfinite(v) and (v > 0 or not log_y)

    ys_all = [tf(float(v)) for vals in series.values() for v in vals if usable(v)]
    if not ys_all:
        ys_all = [0.0, 1.0]
    ylo, yhi = min(ys_all), max(ys_all)
    if yhi == ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    xlo, xhi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v: float) -> float:
        return MARGIN["left"] + (v - xlo) / (xhi - xlo) * pw

    def py(v: float) -> float:
        return MARGIN["top"] + (1 - (v - ylo) / (yhi - ylo)) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="#333"/>',
    ]
    for t in _nice_ticks(xlo, xhi):
        if xlo <= t <= xhi:
            X = px(t)
            out.append(f'<line x1="{X:.2f}" y1="{MARGIN["top"] + ph}" x2="{X:.2f}" '
                       f'y2="{MARGIN["top"] + ph + 5}" stroke="#333"/>')
            out.append(f'<text x="{X:.2f}" y="{MARGIN["top"] + ph + 18}" '
                       f'text-anchor="middle">{_fmt(t)}</text>')
    for t in _nice_ticks(ylo, yhi):
        if ylo <= t <= yhi:
            Y = py(t)
            label = _fmt(10**t) if log_y else _fmt(t)
            out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{Y:.2f}" x2="{MARGIN["left"]}" '
                       f'y2="{Y:.2f}" stroke="#333"/>')
            out.append(f'<line x1="{MARGIN["left"]}" y1="{Y:.2f}" x2="{MARGIN["left"] + pw}" '
                       f'y2="{Y:.2f}" stroke="#ddd"/>')
            out.append(f'<text x="{MARGIN["left"] - 8}" y="{Y + 4:.2f}" '
                       f'text-anchor="end">{escape(label)}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 15}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    ymid = MARGIN["top"] + ph / 2
    ytitle = f"{ylabel} (log scale)" if log_y else ylabel
    out.append(f'<text x="18" y="{ymid:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {ymid:.1f})">{escape(ytitle)}</text>')

    for k, (name, vals) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        runs, cur = [], []
        for xv, yv in zip(xs, vals):
            if usable(yv):
                cur.append(f"{px(xv):.2f},{py(tf(float(yv))):.2f}")
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        for run in runs:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.8" '
                       f'points="{" ".join(run)}"/>')
        ly = MARGIN["top"] + 14 + 18 * k
        lx = WIDTH - MARGIN["right"] + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
