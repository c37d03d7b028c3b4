"""Deterministic SVG rendering of ternary scatter plots.

Output depends only on the points and labels passed in: coordinates are
formatted with fixed precision, attributes are emitted in a fixed order
and no timestamps or environment values are written, so identical input
produces byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

from .geometry import TernaryPoint

_PAD = 48.0
_SIDE = 520.0
_HEIGHT = _SIDE * math.sqrt(3.0) / 2.0


def _fmt(v: float) -> str:
    out = f"{v:.4f}"
    return "0.0000" if out == "-0.0000" else out


def _to_canvas(planar: Tuple[float, float]) -> Tuple[float, float]:
    x = _PAD + planar[0] * _SIDE
    y = _PAD + _HEIGHT - planar[1] * _SIDE
    return x, y


def ternary_svg_string(
    points: Iterable[TernaryPoint],
    corner_labels: Sequence[str] = ("1", "2", "3"),
    title: Optional[str] = None,
) -> str:
    """Render labeled compositions inside an equilateral triangle.

    Corners follow the planar embedding of TernaryPoint: first component
    bottom left, second bottom right, third on top.
    """
    if len(corner_labels) != 3:
        raise ValueError("exactly three corner labels are required")
    width = 2.0 * _PAD + _SIDE
    height = 2.0 * _PAD + _HEIGHT + 18.0
    corners = [
        _to_canvas((0.0, 0.0)),
        _to_canvas((1.0, 0.0)),
        _to_canvas((0.5, math.sqrt(3.0) / 2.0)),
    ]
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
    ]
    if title:
        lines.append(
            f'<title>{escape(title)}</title>'
        )
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in corners)
    lines.append(
        f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1"/>'
    )
    anchor_dy = [(0.0, 16.0), (0.0, 16.0), (0.0, -8.0)]
    for (cx, cy), label, (dx, dy) in zip(corners, corner_labels, anchor_dy):
        lines.append(
            f'<text x="{_fmt(cx + dx)}" y="{_fmt(cy + dy)}" '
            f'font-family="sans-serif" font-size="12" '
            f'text-anchor="middle">{escape(str(label))}</text>'
        )
    for p in points:
        x, y = _to_canvas(p.planar)
        marker = "average" if p.label == "average" else "point"
        if marker == "average":
            lines.append(
                f'<rect x="{_fmt(x - 3.5)}" y="{_fmt(y - 3.5)}" width="7.0000" '
                f'height="7.0000" fill="red" stroke="none"/>'
            )
        else:
            lines.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="2.5000" '
                f'fill="steelblue" stroke="none"/>'
            )
        lines.append(
            f'<text x="{_fmt(x + 4.0)}" y="{_fmt(y - 4.0)}" '
            f'font-family="sans-serif" font-size="9">{escape(p.label)}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_ternary_svg(
    points: Iterable[TernaryPoint],
    path,
    corner_labels: Sequence[str] = ("1", "2", "3"),
    title: Optional[str] = None,
) -> None:
    """Write the rendered plot; bytes depend only on the arguments."""
    data = ternary_svg_string(list(points), corner_labels=corner_labels, title=title)
    Path(path).write_bytes(data.encode("utf-8"))
