"""Deterministic SVG contour plots (solid u-nodes, dashed v-nodes)."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .nodal import NodalCurve

DEFAULT_STYLE = {
    "width": 640,
    "margin": 48,
    "stroke": {"u": "#000000", "v": "#1f4e9c"},
    "dash": {"u": None, "v": "6 4"},
    "line_width": 1.6,
    "title": "",
}


def _fmt(a: float) -> str:
    s = f"{a:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def render_contours(
    window: Sequence[float],
    curves: Mapping[str, Sequence[NodalCurve | np.ndarray]],
    style: Mapping | None = None,
) -> str:
    """SVG of zero curves inside ``window = (x0, x1, y0, y1)``.

    ``curves`` maps a family name ("u" or "v") to polylines; u is drawn solid
    and v dashed unless ``style`` says otherwise.  Output depends only on the
    inputs (fixed number formatting, sorted families), so it is byte-stable.
    """
    st = {**DEFAULT_STYLE, **(style or {})}
    x0, x1, y0, y1 = map(float, window)
    width = int(st["width"])
    m = int(st["margin"])
    scale = (width - 2 * m) / (x1 - x0)
    height = int(round((y1 - y0) * scale)) + 2 * m

    def px(p):
        return (m + (p[:, 0] - x0) * scale, m + (y1 - p[:, 1]) * scale)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if st["title"]:
        out.append(f'<text x="{width // 2}" y="{m // 2}" text-anchor="middle" font-size="14">{st["title"]}</text>')
    # axes: x along the top (the free surface), y along the left edge
    ax0, ay0 = m, m
    out.append(f'<line x1="{ax0}" y1="{ay0}" x2="{width - m}" y2="{ay0}" stroke="#555555" stroke-width="1"/>')
    out.append(f'<line x1="{ax0}" y1="{ay0}" x2="{ax0}" y2="{height - m}" stroke="#555555" stroke-width="1"/>')
    out.append(f'<text x="{width - m + 8}" y="{ay0 + 4}" font-size="14" font-style="italic">x</text>')
    out.append(f'<text x="{ax0 - 4}" y="{height - m + 18}" font-size="14" font-style="italic" text-anchor="middle">y</text>')
    for t in np.arange(np.ceil(x0), np.floor(x1) + 1):
        X = m + (t - x0) * scale
        out.append(f'<line x1="{_fmt(X)}" y1="{ay0 - 4}" x2="{_fmt(X)}" y2="{ay0}" stroke="#555555"/>')
        if t % 2 == 0:
            out.append(f'<text x="{_fmt(X)}" y="{ay0 - 8}" font-size="10" text-anchor="middle">{int(t)}</text>')
    for t in np.arange(np.ceil(y0), np.floor(y1) + 1):
        Y = m + (y1 - t) * scale
        out.append(f'<line x1="{ax0 - 4}" y1="{_fmt(Y)}" x2="{ax0}" y2="{_fmt(Y)}" stroke="#555555"/>')
        if t % 2 == 0:
            out.append(f'<text x="{ax0 - 8}" y="{_fmt(Y + 3)}" font-size="10" text-anchor="end">{int(t)}</text>')

    total = 0
    for fam in sorted(curves):
        dash = st["dash"].get(fam)
        color = st["stroke"].get(fam, "#000000")
        for c in curves[fam]:
            pts = c.vertices if isinstance(c, NodalCurve) else np.asarray(c, float)
            if len(pts) < 2:
                continue
            X, Y = px(pts)
            d = "M" + " L".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(X, Y))
            extra = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(
                f'<path class="{fam}-node" d="{d}" fill="none" stroke="{color}"'
                f' stroke-width="{st["line_width"]}"{extra}/>'
            )
            total += 1
    if total == 0:
        out.append(
            f'<text class="warning" x="{width // 2}" y="{height // 2}" text-anchor="middle" font-size="14"'
            ' fill="#b00020">warning: no curves to draw</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
