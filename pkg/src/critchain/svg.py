"""Tiny dependency-free SVG line and heat-map plots."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=80, right=150, top=40, bottom=60)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi):
        return []
    if hi == lo:
        return [lo]
    return list(np.linspace(lo, hi, n))


def _fmt_tick(v: float, log: bool) -> str:
    if log:
        return f"1e{v:.2g}" if abs(v - round(v)) > 1e-9 else f"1e{int(round(v))}"
    return f"{v:.3g}"


def _frame(title: str, xlabel: str, ylabel: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{MARGIN["left"] + (WIDTH - MARGIN["left"] - MARGIN["right"]) / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="18" y="{HEIGHT / 2:.1f}" text-anchor="middle" transform="rotate(-90 18 {HEIGHT / 2:.1f})">{escape(ylabel)}</text>',
    ]


class _Scale:
    def __init__(self, lo, hi, a, b):
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi == lo:
            lo, hi = (lo - 1, hi + 1) if math.isfinite(lo) else (0.0, 1.0)
        self.lo, self.hi, self.a, self.b = lo, hi, a, b

    def __call__(self, v):
        return self.a + (v - self.lo) / (self.hi - self.lo) * (self.b - self.a)


def _axes(parts, xs: _Scale, ys: _Scale, logx: bool, logy: bool):
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    parts.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>')
    for t in _ticks(xs.lo, xs.hi):
        x = xs(t)
        parts.append(f'<line x1="{x:.1f}" y1="{y0}" x2="{x:.1f}" y2="{y0 + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.1f}" y="{y0 + 18}" text-anchor="middle">{_fmt_tick(t, logx)}</text>')
    for t in _ticks(ys.lo, ys.hi):
        y = ys(t)
        parts.append(f'<line x1="{x0 - 5}" y1="{y:.1f}" x2="{x0}" y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 8}" y="{y + 4:.1f}" text-anchor="end">{_fmt_tick(t, logy)}</text>')


def line_plot(
    x,
    series: dict,
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = False,
) -> str:
    """Polylines for each labelled series; non-finite points break the line."""
    x = np.asarray(x, dtype=float)
    tx = np.log10(x) if logx else x
    all_y = []
    prepared = {}
    for label, y in series.items():
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ty = np.log10(y) if logy else y
        prepared[label] = ty
        all_y.append(ty[np.isfinite(ty)])
    ys_all = np.concatenate(all_y) if all_y else np.array([])
    ylo, yhi = (float(ys_all.min()), float(ys_all.max())) if ys_all.size else (0.0, 1.0)
    fx = tx[np.isfinite(tx)]
    xs = _Scale(float(fx.min()), float(fx.max()), MARGIN["left"], WIDTH - MARGIN["right"])
    ys = _Scale(ylo, yhi, HEIGHT - MARGIN["bottom"], MARGIN["top"])
    parts = _frame(title, xlabel, ylabel)
    _axes(parts, xs, ys, logx, logy)
    for i, (label, ty) in enumerate(prepared.items()):
        colour = PALETTE[i % len(PALETTE)]
        segment = []
        for xv, yv in zip(tx, ty):
            if math.isfinite(xv) and math.isfinite(yv):
                segment.append(f"{xs(xv):.2f},{ys(yv):.2f}")
            elif segment:
                parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{" ".join(segment)}"/>')
                segment = []
        if segment:
            parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{" ".join(segment)}"/>')
        ly = MARGIN["top"] + 16 * i + 8
        lx = WIDTH - MARGIN["right"] + 10
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 25}" y="{ly + 4}">{escape(str(label))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _colour(t: float) -> str:
    """Blue-to-yellow ramp for t in [0, 1]."""
    t = min(1.0, max(0.0, t))
    r = int(round(40 + 215 * t))
    g = int(round(30 + 200 * t))
    b = int(round(120 * (1 - t) + 40))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(
    x,
    y,
    z,
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = False,
) -> str:
    """Cells coloured by ``z`` with shape (len(y), len(x)); NaN cells are grey."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    tx = np.log10(x) if logx else x
    ty = np.log10(y) if logy else y
    xs = _Scale(float(tx.min()), float(tx.max()), MARGIN["left"], WIDTH - MARGIN["right"])
    ys = _Scale(float(ty.min()), float(ty.max()), HEIGHT - MARGIN["bottom"], MARGIN["top"])
    finite = z[np.isfinite(z)]
    zlo, zhi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    span = zhi - zlo or 1.0
    parts = _frame(title, xlabel, ylabel)
    cw = (WIDTH - MARGIN["left"] - MARGIN["right"]) / max(len(tx), 1)
    ch = (HEIGHT - MARGIN["top"] - MARGIN["bottom"]) / max(len(ty), 1)
    for j, yv in enumerate(ty):
        for i, xv in enumerate(tx):
            v = z[j, i]
            fill = _colour((v - zlo) / span) if math.isfinite(v) else "#bbbbbb"
            parts.append(
                f'<rect x="{xs(xv) - cw / 2:.2f}" y="{ys(yv) - ch / 2:.2f}" width="{cw + 0.3:.2f}" height="{ch + 0.3:.2f}" fill="{fill}"/>'
            )
    _axes(parts, xs, ys, logx, logy)
    lx = WIDTH - MARGIN["right"] + 20
    for k in range(6):
        t = k / 5
        yk = MARGIN["top"] + (1 - t) * 200
        parts.append(f'<rect x="{lx}" y="{yk:.1f}" width="15" height="40" fill="{_colour(t)}"/>')
        parts.append(f'<text x="{lx + 20}" y="{yk + 5:.1f}">{zlo + t * span:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
