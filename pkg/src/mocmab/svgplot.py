"""Minimal dependency-free SVG line plots (fixed 960x540 canvas)."""
from __future__ import annotations

from html import escape
from typing import Sequence

WIDTH, HEIGHT = 960, 540
MARGIN = dict(left=90, right=190, top=50, bottom=70)
PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f")


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-2:
        return f"{v:.2g}".replace("e+0", "e").replace("e+", "e")
    return f"{v:.4g}"


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def line_plot(x: Sequence[float], series: dict[str, Sequence[float]], title: str,
              xlabel: str, ylabel: str, xticks: Sequence[float] | None = None) -> str:
    """Return an SVG document with one polyline per entry of ``series``."""
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    x0, x1 = float(min(x)), float(max(x))
    ys = [float(v) for s in series.values() for v in s]
    y0, y1 = min(0.0, min(ys, default=0.0)), max(ys, default=1.0)
    if y1 <= y0:
        y1 = y0 + 1.0
    if x1 <= x0:
        x1 = x0 + 1.0

    def px(v):
        return MARGIN["left"] + (float(v) - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + ph - (float(v) - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="28" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line x1="{px(x0):.1f}" y1="{py(y0):.1f}" x2="{px(x1):.1f}" y2="{py(y0):.1f}" stroke="black"/>',
        f'<line x1="{px(x0):.1f}" y1="{py(y0):.1f}" x2="{px(x0):.1f}" y2="{py(y1):.1f}" stroke="black"/>',
    ]
    for v in (xticks if xticks is not None else _nice_ticks(x0, x1)):
        out.append(f'<line x1="{px(v):.1f}" y1="{py(y0):.1f}" x2="{px(v):.1f}" y2="{py(y0) + 5:.1f}" stroke="black"/>')
        out.append(f'<text x="{px(v):.1f}" y="{py(y0) + 20:.1f}" text-anchor="middle">{_fmt(v)}</text>')
    for v in _nice_ticks(y0, y1):
        out.append(f'<line x1="{px(x0) - 5:.1f}" y1="{py(v):.1f}" x2="{px(x0):.1f}" y2="{py(v):.1f}" stroke="black"/>')
        out.append(f'<line x1="{px(x0):.1f}" y1="{py(v):.1f}" x2="{px(x1):.1f}" y2="{py(v):.1f}" stroke="#e5e5e5"/>')
        out.append(f'<text x="{px(x0) - 8:.1f}" y="{py(v) + 4:.1f}" text-anchor="end">{_fmt(v)}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 20}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="20" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 20 {MARGIN["top"] + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (name, ys_) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, ys_))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = MARGIN["top"] + 10 + 22 * i
        lx = WIDTH - MARGIN["right"] + 20
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="{color}" stroke-width="3"/>')
        out.append(f'<text x="{lx + 38}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
