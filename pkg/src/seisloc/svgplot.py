"""Minimal deterministic SVG line charts.

Hand-rolled so that identical data always yields byte-identical output:
fixed canvas, fixed palette, fixed number formatting, no timestamps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

WIDTH = 640
HEIGHT = 420
MARGIN_L = 64
MARGIN_R = 150  # room for the legend
MARGIN_T = 36
MARGIN_B = 48

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


@dataclass
class Series:
    label: str
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self) -> None:
        self.xs = np.asarray(self.xs, dtype=float)
        self.ys = np.asarray(self.ys, dtype=float)


@dataclass
class Chart:
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    series: list[Series] = field(default_factory=list)


def _fmt(v: float) -> str:
    """Fixed-precision coordinate formatting keeps output byte-stable."""
    return f"{v:.2f}"


def _tick_values(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + k * step for k in range(count)]


def render_chart(chart: Chart) -> str:
    xs = np.concatenate([s.xs for s in chart.series]) if chart.series else np.empty(0)
    ys = np.concatenate([s.ys for s in chart.series]) if chart.series else np.empty(0)
    x_lo, x_hi = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
    y_lo, y_hi = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v: float) -> float:
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return MARGIN_T + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="22" text-anchor="middle" font-size="16" '
        f'font-family="sans-serif">{_escape(chart.title)}</text>',
    ]

    # Axes.
    x0, y0 = MARGIN_L, MARGIN_T + plot_h
    out.append(
        f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="black"/>'
    )
    out.append(f'<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>')
    for v in _tick_values(x_lo, x_hi):
        px = sx(v)
        out.append(f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y0 + 5}" stroke="black"/>')
        out.append(
            f'<text x="{_fmt(px)}" y="{y0 + 20}" text-anchor="middle" font-size="11" '
            f'font-family="sans-serif">{v:g}</text>'
        )
    for v in _tick_values(y_lo, y_hi):
        py = sy(v)
        out.append(f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" stroke="black"/>')
        out.append(
            f'<text x="{x0 - 8}" y="{_fmt(py + 4)}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif">{v:g}</text>'
        )
    out.append(
        f'<text x="{x0 + plot_w // 2}" y="{HEIGHT - 10}" text-anchor="middle" '
        f'font-size="13" font-family="sans-serif">{_escape(chart.x_label)}</text>'
    )
    out.append(
        f'<text x="16" y="{MARGIN_T + plot_h // 2}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif" transform="rotate(-90 16 {MARGIN_T + plot_h // 2})">'
        f"{_escape(chart.y_label)}</text>"
    )

    # Series polylines and legend.
    for idx, series in enumerate(chart.series):
        color = PALETTE[idx % len(PALETTE)]
        points = " ".join(
            f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(series.xs, series.ys)
        )
        if points:
            out.append(
                f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        ly = MARGIN_T + 14 + 18 * idx
        lx = MARGIN_L + plot_w + 12
        out.append(
            f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{lx + 26}" y="{ly + 4}" font-size="11" font-family="sans-serif">'
            f"{_escape(series.label)}</text>"
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def save_chart(path, chart: Chart) -> None:
    with open(path, "w") as fh:
        fh.write(render_chart(chart))
