"""Deterministic SVG wireframes of recommended dashboard candidates.

Renders the 4x4 grid, one labeled rectangle per view (id plus mark), and an
arrow per coordination link: solid for filter, dashed for brush.  Output is
plain text built with fixed formatting so identical candidates produce
byte-identical files.
"""

from __future__ import annotations

import math

from dashmine.corpus import GRID_N, ViewSpec
from dashmine.recommender import Candidate

CELL = 120
PAD = 20


def _fmt(v: float) -> str:
    return f"{v:.1f}"


def render_svg(candidate: Candidate, views: list[ViewSpec]) -> str:
    """SVG wireframe for one candidate; deterministic output bytes."""
    width = GRID_N * CELL + 2 * PAD
    height = GRID_N * CELL + 2 * PAD
    marks = {v.id: v.mark for v in views}
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        "<defs>",
        '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
        'markerWidth="7" markerHeight="7" orient="auto-start-reverse">'
        '<path d="M 0 0 L 10 5 L 0 10 z" fill="#333333"/></marker>',
        "</defs>",
    ]
    # Grid lines under the view rectangles.
    for i in range(GRID_N + 1):
        p = PAD + i * CELL
        lines.append(
            f'<line x1="{p}" y1="{PAD}" x2="{p}" y2="{PAD + GRID_N * CELL}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        lines.append(
            f'<line x1="{PAD}" y1="{p}" x2="{PAD + GRID_N * CELL}" y2="{p}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )

    centers: dict[str, tuple[float, float]] = {}
    for vid in sorted(candidate.assignment):
        gx, gy, gw, gh = candidate.assignment[vid]
        x = PAD + gx * CELL
        y = PAD + gy * CELL
        w = gw * CELL
        h = gh * CELL
        centers[vid] = (x + w / 2, y + h / 2)
        lines.append(
            f'<rect x="{x + 3}" y="{y + 3}" width="{w - 6}" height="{h - 6}" '
            'fill="#f2f6fb" stroke="#4c78a8" stroke-width="2" rx="4"/>'
        )
        label = f"{vid} ({marks.get(vid, '?')})"
        lines.append(
            f'<text x="{x + w / 2:.1f}" y="{y + h / 2:.1f}" '
            'text-anchor="middle" dominant-baseline="middle" '
            f'font-family="sans-serif" font-size="14" fill="#1f2933">{label}</text>'
        )

    for source, target, kind in candidate.links():
        sx, sy = centers[source]
        tx, ty = centers[target]
        dx, dy = tx - sx, ty - sy
        norm = math.hypot(dx, dy) or 1.0
        # Pull endpoints toward each other so arrowheads stay visible.
        sx2, sy2 = sx + dx / norm * 18, sy + dy / norm * 18
        tx2, ty2 = tx - dx / norm * 24, ty - dy / norm * 24
        dash = ' stroke-dasharray="7,5"' if kind == "brush" else ""
        lines.append(
            f'<line x1="{_fmt(sx2)}" y1="{_fmt(sy2)}" x2="{_fmt(tx2)}" '
            f'y2="{_fmt(ty2)}" stroke="#333333" stroke-width="2"{dash} '
            'marker-end="url(#arrow)"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
