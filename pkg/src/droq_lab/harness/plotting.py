"""Minimal SVG line charts of return and bias against environment steps."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

PANEL_W, PANEL_H = 420, 260
MARGIN = dict(left=64, right=16, top=28, bottom=40)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * abs(step):
        out.append(v)
        v += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _panel(x0: float, title: str, series: dict[str, tuple[list, list]]) -> list[str]:
    parts = []
    pw = PANEL_W - MARGIN["left"] - MARGIN["right"]
    ph = PANEL_H - MARGIN["top"] - MARGIN["bottom"]
    left, top = x0 + MARGIN["left"], MARGIN["top"]
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys) if math.isfinite(y)]
    parts.append(f'<text x="{x0 + PANEL_W / 2}" y="18" text-anchor="middle" '
                 f'font-size="13">{escape(title)}</text>')
    parts.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" '
                 'fill="none" stroke="#444"/>')
    if pts:
        xlo, xhi = min(p[0] for p in pts), max(p[0] for p in pts)
        ylo, yhi = min(p[1] for p in pts), max(p[1] for p in pts)
    if not pts or not math.isfinite(yhi - ylo):
        # Nothing plottable, or a diverged run whose values overflow the axis span.
        parts.append(f'<text x="{left + pw / 2}" y="{top + ph / 2}" text-anchor="middle" '
                     'font-size="12">no plottable data</text>')
        return parts
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        pad = max(0.5, 1e-3 * abs(ylo))
        ylo, yhi = ylo - pad, yhi + pad

    def sx(x):
        return left + (x - xlo) / (xhi - xlo) * pw

    def sy(y):
        return top + ph - (y - ylo) / (yhi - ylo) * ph

    for t in _ticks(xlo, xhi):
        parts.append(f'<text x="{sx(t):.1f}" y="{top + ph + 16}" text-anchor="middle" '
                     f'font-size="10">{_fmt(t)}</text>')
    for t in _ticks(ylo, yhi):
        parts.append(f'<line x1="{left}" x2="{left + pw}" y1="{sy(t):.1f}" y2="{sy(t):.1f}" '
                     'stroke="#ddd"/>')
        parts.append(f'<text x="{left - 6}" y="{sy(t) + 3:.1f}" text-anchor="end" '
                     f'font-size="10">{_fmt(t)}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{PANEL_H - 6}" text-anchor="middle" '
                 'font-size="11">env steps</text>')
    for k, (label, (xs, ys)) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in zip(xs, ys) if math.isfinite(y))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        parts.append(f'<text x="{left + 6}" y="{top + 14 + 13 * k}" font-size="11" '
                     f'fill="{color}">{escape(label)}</text>')
    return parts


def curves_svg(runs: dict[str, list[dict]]) -> str:
    """Two-panel chart (average return, average bias) for one or more labelled runs.

    ``runs`` maps a label to rows as returned by ``read_metrics_csv``.
    """
    ret, bias = {}, {}
    for label, rows in runs.items():
        xs = [float(r["env_step"]) for r in rows]
        ret[label] = (xs, [float(r["avg_return"]) for r in rows])
        bias[label] = (xs, [float(r["avg_bias"]) for r in rows])
    body = _panel(0, "average return", ret) + _panel(PANEL_W, "average bias", bias)
    width, height = 2 * PANEL_W, PANEL_H
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def write_curves(path, runs: dict[str, list[dict]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(curves_svg(runs))
