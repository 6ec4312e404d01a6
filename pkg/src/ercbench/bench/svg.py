"""Minimal standalone SVG charts (box plots, bar charts, heatmaps).

Output is plain text built with fixed number formatting, so the same data
always gives the same bytes.  Each chart embeds its data as CSV inside
``<metadata>``.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

FONT = "font-family=\"Helvetica, Arial, sans-serif\""
PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
           "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295")


def _f(v: float) -> str:
    return f"{v:.2f}"


def _doc(width: float, height: float, title: str, body: list[str], data_csv: str) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">',
        f"<title>{escape(title)}</title>",
        f"<metadata>{escape(data_csv)}</metadata>",
        f'<rect x="0" y="0" width="{_f(width)}" height="{_f(height)}" fill="white"/>',
        f'<text x="{_f(width / 2)}" y="18.00" text-anchor="middle" font-size="14" {FONT}>'
        f"{escape(title)}</text>",
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _text(x, y, s, size=11, anchor="middle", rotate: Optional[float] = None, fill="black"):
    rot = f' transform="rotate({_f(rotate)} {_f(x)} {_f(y)})"' if rotate is not None else ""
    return (f'<text x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}" font-size="{size}" '
            f'fill="{fill}" {FONT}{rot}>{escape(str(s))}</text>')


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks


def _tick_label(v: float, log10: bool) -> str:
    if log10:
        return f"1e{int(round(v))}" if abs(v - round(v)) < 1e-9 else f"1e{v:.1f}"
    if abs(v) >= 1000 or (v != 0 and abs(v) < 0.01):
        return f"{v:.1e}"
    return f"{v:g}"


def box_plot(title: str, groups: Sequence[tuple[str, Sequence[float]]], y_label: str,
             log10: bool = False, marker: Optional[float] = None,
             marker_label: str = "", data_csv: str = "") -> str:
    """Box plots (1.5 IQR whiskers, outliers as open circles) for labelled groups."""
    width = max(360.0, 80.0 + 60.0 * len(groups))
    height = 360.0
    left, right, top, bottom = 60.0, 20.0, 30.0, 110.0
    pw, ph = width - left - right, height - top - bottom
    prepared = []
    for label, values in groups:
        v = np.asarray(values, dtype=float)
        v = v[np.isfinite(v)]
        if log10:
            v = np.log10(np.maximum(v, 1e-300))
        prepared.append((label, v))
    allv = np.concatenate([v for _, v in prepared if v.size] or [np.zeros(1)])
    lo, hi = float(allv.min()), float(allv.max())
    if marker is not None:
        lo, hi = min(lo, marker), max(hi, marker)
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def ypos(v):
        return top + ph * (1.0 - (v - lo) / (hi - lo))

    body = [f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(pw)}" height="{_f(ph)}" '
            f'fill="none" stroke="#888"/>']
    for t in _nice_ticks(lo, hi):
        if lo <= t <= hi:
            y = ypos(t)
            body.append(f'<line x1="{_f(left - 4)}" y1="{_f(y)}" x2="{_f(left)}" y2="{_f(y)}" '
                        f'stroke="#444"/>')
            body.append(_text(left - 6, y + 4, _tick_label(t, log10), 10, "end"))
    body.append(_text(14, top + ph / 2, y_label, 11, "middle", rotate=-90))
    slot = pw / max(len(prepared), 1)
    for i, (label, v) in enumerate(prepared):
        cx = left + slot * (i + 0.5)
        color = PALETTE[i % len(PALETTE)]
        body.append(_text(cx, top + ph + 14, label, 10, "end", rotate=-45))
        if v.size == 0:
            continue
        q1, med, q3 = (float(q) for q in np.percentile(v, [25, 50, 75]))
        iqr = q3 - q1
        inside = v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]
        wlo, whi = float(inside.min()), float(inside.max())
        bw = min(30.0, slot * 0.6)
        body.append(f'<line x1="{_f(cx)}" y1="{_f(ypos(whi))}" x2="{_f(cx)}" '
                    f'y2="{_f(ypos(wlo))}" stroke="#333"/>')
        body.append(f'<rect x="{_f(cx - bw / 2)}" y="{_f(ypos(q3))}" width="{_f(bw)}" '
                    f'height="{_f(max(ypos(q1) - ypos(q3), 0.5))}" fill="{color}" '
                    f'fill-opacity="0.7" stroke="#333"/>')
        body.append(f'<line x1="{_f(cx - bw / 2)}" y1="{_f(ypos(med))}" x2="{_f(cx + bw / 2)}" '
                    f'y2="{_f(ypos(med))}" stroke="black" stroke-width="2"/>')
        for o in sorted(set(float(x) for x in v[(v < q1 - 1.5 * iqr) | (v > q3 + 1.5 * iqr)])):
            body.append(f'<circle cx="{_f(cx)}" cy="{_f(ypos(o))}" r="2.50" fill="none" '
                        f'stroke="#333"/>')
    if marker is not None:
        y = ypos(marker)
        body.append(f'<line x1="{_f(left)}" y1="{_f(y)}" x2="{_f(left + pw)}" y2="{_f(y)}" '
                    f'stroke="red" stroke-dasharray="4 3"/>')
        if marker_label:
            body.append(_text(left + pw - 4, y - 4, marker_label, 10, "end", fill="red"))
    return _doc(width, height, title, body, data_csv)


def bar_chart(title: str, categories: Sequence[str], series: Sequence[tuple[str, Sequence]],
              annotations: Sequence[Sequence[str]] = (), y_range=(-1.0, 1.0),
              y_label: str = "", data_csv: str = "") -> str:
    """Grouped bars; ``None`` values are left out; annotations are printed above each bar."""
    width = max(420.0, 100.0 + 26.0 * len(categories) * max(len(series), 1))
    height = 380.0
    left, right, top, bottom = 60.0, 140.0, 30.0, 120.0
    pw, ph = width - left - right, height - top - bottom
    lo, hi = y_range

    def ypos(v):
        return top + ph * (1.0 - (v - lo) / (hi - lo))

    body = [f'<rect x="{_f(left)}" y="{_f(top)}" width="{_f(pw)}" height="{_f(ph)}" '
            f'fill="none" stroke="#888"/>']
    for t in _nice_ticks(lo, hi, 4):
        if lo <= t <= hi:
            body.append(f'<line x1="{_f(left)}" y1="{_f(ypos(t))}" x2="{_f(left + pw)}" '
                        f'y2="{_f(ypos(t))}" stroke="#ddd"/>')
            body.append(_text(left - 6, ypos(t) + 4, f"{t:g}", 10, "end"))
    body.append(_text(14, top + ph / 2, y_label, 11, "middle", rotate=-90))
    slot = pw / max(len(categories), 1)
    bw = slot * 0.8 / max(len(series), 1)
    zero = ypos(min(max(0.0, lo), hi))
    for ci, cat in enumerate(categories):
        x0 = left + slot * ci + slot * 0.1
        body.append(_text(left + slot * (ci + 0.5), top + ph + 14, cat, 10, "end", rotate=-45))
        for si, (_, values) in enumerate(series):
            v = values[ci]
            if v is None or not math.isfinite(v):
                continue
            y = ypos(v)
            x = x0 + si * bw
            body.append(f'<rect x="{_f(x)}" y="{_f(min(y, zero))}" width="{_f(bw * 0.95)}" '
                        f'height="{_f(abs(zero - y))}" fill="{PALETTE[si % len(PALETTE)]}"/>')
            if annotations and annotations[si][ci]:
                ty = min(y, zero) - 3 if v >= 0 else max(y, zero) + 10
                body.append(_text(x + bw / 2, ty, annotations[si][ci], 8))
    for si, (name, _) in enumerate(series):
        y = top + 12 + 16 * si
        body.append(f'<rect x="{_f(left + pw + 10)}" y="{_f(y - 9)}" width="10.00" '
                    f'height="10.00" fill="{PALETTE[si % len(PALETTE)]}"/>')
        body.append(_text(left + pw + 24, y, name, 10, "start"))
    return _doc(width, height, title, body, data_csv)


def heatmap(title: str, rows: Sequence[str], cols: Sequence[str], values, fmt: str = "{:g}",
            vmin: Optional[float] = None, vmax: Optional[float] = None,
            x_label: str = "", data_csv: str = "") -> str:
    """Colour grid with each value written in its cell; ``None`` cells are grey."""
    cw, rh = 36.0, 22.0
    left, top = 150.0, 34.0
    width = left + cw * len(cols) + 20.0
    height = top + rh * len(rows) + 50.0
    flat = [v for r in values for v in r if v is not None and math.isfinite(v)]
    lo = vmin if vmin is not None else (min(flat) if flat else 0.0)
    hi = vmax if vmax is not None else (max(flat) if flat else 1.0)
    span = hi - lo if hi > lo else 1.0
    body = []
    for ri, name in enumerate(rows):
        y = top + rh * ri
        body.append(_text(left - 6, y + rh / 2 + 4, name, 10, "end"))
        for ci in range(len(cols)):
            v = values[ri][ci]
            x = left + cw * ci
            if v is None or not math.isfinite(v):
                fill, label, ink = "#dddddd", "", "black"
            else:
                t = min(max((v - lo) / span, 0.0), 1.0)
                # white -> dark blue
                r_, g_, b_ = (int(round(255 + (c - 255) * t)) for c in (8, 48, 107))
                fill = f"#{r_:02x}{g_:02x}{b_:02x}"
                label, ink = fmt.format(v), ("white" if t > 0.55 else "black")
            body.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(cw)}" height="{_f(rh)}" '
                        f'fill="{fill}" stroke="white"/>')
            body.append(_text(x + cw / 2, y + rh / 2 + 4, label, 9, fill=ink))
    for ci, name in enumerate(cols):
        body.append(_text(left + cw * (ci + 0.5), top + rh * len(rows) + 14, name, 10))
    if x_label:
        body.append(_text(left + cw * len(cols) / 2, top + rh * len(rows) + 34, x_label, 11))
    return _doc(width, height, title, body, data_csv)
