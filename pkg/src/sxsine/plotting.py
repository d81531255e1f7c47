"""Deterministic SVG rendering of 2-D reach polygons and trajectories."""

from __future__ import annotations

from typing import Sequence

from .sx_io import Polygon

POLYGON_STYLE = 'fill="#3b3b3b" fill-opacity="0.45" stroke="#000000" stroke-width="0.5"'
POLYLINE_STYLE = 'fill="none" stroke="#d62728" stroke-width="1.2"'


def _fmt(v: float) -> str:
    return f"{v:.6f}"


class _Frame:
    def __init__(self, points, width, height, pad):
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        self.x0, self.x1 = min(xs), max(xs)
        self.y0, self.y1 = min(ys), max(ys)
        if self.x1 == self.x0:
            self.x0, self.x1 = self.x0 - 1, self.x1 + 1
        if self.y1 == self.y0:
            self.y0, self.y1 = self.y0 - 1, self.y1 + 1
        self.width, self.height, self.pad = width, height, pad

    def __call__(self, x, y):
        w = self.width - 2 * self.pad
        h = self.height - 2 * self.pad
        px = self.pad + (x - self.x0) / (self.x1 - self.x0) * w
        py = self.height - self.pad - (y - self.y0) / (self.y1 - self.y0) * h
        return px, py


def render_svg(polygons: Sequence[Polygon], polyline: Sequence[tuple[float, float]] = (),
               labels: tuple[str, str] = ("t", "y"), width: int = 640, height: int = 480) -> str:
    """Polygons in one fill color with an optional trajectory polyline on top."""
    points = [v for poly in polygons for v in poly.vertices] + list(polyline)
    if not points:
        points = [(0.0, 0.0)]
    frame = _Frame(points, width, height, pad=40)

    def pts(vertices):
        return " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in (frame(x, y) for x, y in vertices))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff" />',
        f'<g id="reach" {POLYGON_STYLE}>',
    ]
    out += [f'<polygon points="{pts(poly.vertices)}" />' for poly in polygons]
    out.append("</g>")
    if polyline:
        out.append(f'<polyline id="trajectory" {POLYLINE_STYLE} points="{pts(polyline)}" />')
    xl, yl = labels
    out += [
        f'<text x="{width // 2}" y="{height - 8}" text-anchor="middle" font-size="12">{xl} '
        f'[{frame.x0:.6g}, {frame.x1:.6g}]</text>',
        f'<text x="12" y="{height // 2}" font-size="12" transform="rotate(-90 12 {height // 2})" '
        f'text-anchor="middle">{yl} [{frame.y0:.6g}, {frame.y1:.6g}]</text>',
        "</svg>",
    ]
    return "\n".join(out) + "\n"
