"""Minimal self-contained SVG line charts (no plotting dependencies).

Line charts with linear or log-log axes, tick labels, and a legend. Points
with nonfinite coordinates are dropped; on log axes nonpositive values are
dropped too. Output is a single standalone .svg file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
)

WIDTH = 760
HEIGHT = 480
MARGIN_L = 72
MARGIN_R = 16
MARGIN_T = 40
MARGIN_B = 56


@dataclass
class Series:
    label: str
    x: list
    y: list


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if (hi - lo) / step <= target + 0.5:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * abs(step):
        ticks.append(0.0 if abs(t) < 1e-15 * abs(step) else t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    ticks = [10.0 ** e for e in range(lo_e, hi_e + 1)]
    return [t for t in ticks if lo / 1.0001 <= t <= hi * 1.0001]


def _fmt(value: float) -> str:
    return f"{value:.4g}"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def line_chart(
    series_list: list[Series],
    path: str,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    loglog: bool = False,
) -> None:
    cleaned: list[tuple[str, list[tuple[float, float]]]] = []
    for s in series_list:
        pts = []
        for xv, yv in zip(s.x, s.y):
            xf, yf = float(xv), float(yv)
            if not (math.isfinite(xf) and math.isfinite(yf)):
                continue
            if loglog and (xf <= 0.0 or yf <= 0.0):
                continue
            pts.append((xf, yf))
        if pts:
            cleaned.append((s.label, pts))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{_esc(title)}</text>'
        )

    if not cleaned:
        parts.append(
            f'<text x="{WIDTH / 2}" y="{HEIGHT / 2}" text-anchor="middle" fill="#888">no data</text>'
        )
        parts.append("</svg>")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(parts) + "\n")
        return

    xs = [p[0] for _, pts in cleaned for p in pts]
    ys = [p[1] for _, pts in cleaned for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if loglog:
        x_lo, x_hi = math.log10(x_lo), math.log10(x_hi)
        y_lo, y_hi = math.log10(y_lo), math.log10(y_hi)
    if x_hi - x_lo < 1e-12:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad_y = 0.04 * (y_hi - y_lo)
    y_lo -= pad_y
    y_hi += pad_y

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(xv: float) -> float:
        t = math.log10(xv) if loglog else xv
        return MARGIN_L + (t - x_lo) / (x_hi - x_lo) * plot_w

    def py(yv: float) -> float:
        t = math.log10(yv) if loglog else yv
        return MARGIN_T + plot_h - (t - y_lo) / (y_hi - y_lo) * plot_h

    parts.append(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#333" stroke-width="1"/>'
    )

    if loglog:
        x_ticks = _log_ticks(10.0 ** x_lo, 10.0 ** x_hi)
        y_ticks = _log_ticks(10.0 ** y_lo, 10.0 ** y_hi)
    else:
        x_ticks = _nice_ticks(x_lo, x_hi)
        y_ticks = _nice_ticks(y_lo, y_hi)

    for t in x_ticks:
        gx = px(t)
        parts.append(
            f'<line x1="{gx:.2f}" y1="{MARGIN_T}" x2="{gx:.2f}" y2="{MARGIN_T + plot_h}" '
            'stroke="#ddd" stroke-width="0.7"/>'
        )
        parts.append(
            f'<text x="{gx:.2f}" y="{MARGIN_T + plot_h + 18}" text-anchor="middle">{_fmt(t)}</text>'
        )
    for t in y_ticks:
        gy = py(t)
        parts.append(
            f'<line x1="{MARGIN_L}" y1="{gy:.2f}" x2="{MARGIN_L + plot_w}" y2="{gy:.2f}" '
            'stroke="#ddd" stroke-width="0.7"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 6}" y="{gy + 4:.2f}" text-anchor="end">{_fmt(t)}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{MARGIN_L + plot_w / 2}" y="{HEIGHT - 14}" text-anchor="middle">{_esc(xlabel)}</text>'
        )
    if ylabel:
        cy = MARGIN_T + plot_h / 2
        parts.append(
            f'<text x="18" y="{cy}" text-anchor="middle" transform="rotate(-90 18 {cy})">{_esc(ylabel)}</text>'
        )

    for i, (label, pts) in enumerate(cleaned):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{px(xv):.2f},{py(yv):.2f}" for xv, yv in pts)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.4"/>'
        )

    legend_y = MARGIN_T + 10
    for i, (label, _) in enumerate(cleaned):
        color = PALETTE[i % len(PALETTE)]
        ly = legend_y + 16 * i
        lx = MARGIN_L + plot_w - 150
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{lx + 28}" y="{ly}">{_esc(label)}</text>')

    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
