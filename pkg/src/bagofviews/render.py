"""Standalone SVG rendering of a sampling run."""

from __future__ import annotations

from typing import Iterable, Optional
from xml.sax.saxutils import quoteattr

from .canvas import Canvas
from .geometry import BBox
from .pipeline import SampleOutput

LAYERS = ("canvas", "edges", "concepts", "views")

PROPOSAL = "#2ca02c"
EXTRA = "#f2c200"
EDGE = "#8fd3ff"
REDUCED = "#c9a9f5"
VIEW = "#1f5bd6"


def _num(v: float) -> str:
    return repr(float(v))


def _rect(b: BBox, stroke: str, fill: str = "none", width: float = 2.0, extra: str = "") -> str:
    return (
        f'<rect x="{_num(b.x1)}" y="{_num(b.y1)}" width="{_num(b.width)}" height="{_num(b.height)}" '
        f'fill="{fill}" stroke="{stroke}" stroke-width="{_num(width)}"{extra}/>'
    )


def render_svg(
    output: SampleOutput,
    layers: Iterable[str],
    canvas: Optional[Canvas] = None,
) -> str:
    """One ``<g>`` per requested layer, in fixed order.

    Colors: proposals green, extra proposals yellow, edge steps light blue,
    reduced RPN boxes light purple, chosen views blue. The canvas layer
    shades each coordinate by its strongest direction and needs ``canvas``.
    """
    wanted = set(layers)
    if not wanted:
        raise ValueError("at least one layer is required")
    unknown = wanted - set(LAYERS)
    if unknown:
        raise ValueError(f"unknown layers: {sorted(unknown)}")
    w, h = output.image.width, output.image.height
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect id="frame" x="0" y="0" width="{w}" height="{h}" fill="white" stroke="black" stroke-width="1"/>',
    ]
    if "canvas" in wanted:
        parts.append('<g id="canvas">')
        for sb in output.reduced:
            parts.append("  " + _rect(sb.box, REDUCED, fill=REDUCED, width=1.0, extra=' fill-opacity="0.35"'))
        if canvas is not None:
            r = max(1.0, canvas.interval / 10.0)
            for row in range(canvas.rows):
                for col in range(canvas.cols):
                    p = float(canvas.probs[row, col].max())
                    if p <= 0:
                        continue
                    x, y = canvas.point(row, col)
                    parts.append(
                        f'  <circle cx="{_num(x)}" cy="{_num(y)}" r="{_num(r)}" fill="{REDUCED}" '
                        f'fill-opacity="{_num(min(1.0, 0.2 + p))}"/>'
                    )
        parts.append("</g>")
    if "edges" in wanted:
        parts.append('<g id="edges">')
        interval = output.config.interval
        for path in output.paths:
            pts = " ".join(
                f"{_num(min(c * interval, w))},{_num(min(r * interval, h))}" for r, c in path.steps
            )
            parts.append(
                f'  <polyline points="{pts}" fill="none" stroke="{EDGE}" stroke-width="3" '
                f"data-pair={quoteattr(f'{path.start}-{path.end}')} data-end={quoteattr(path.terminated.value)}/>"
            )
        parts.append("</g>")
    if "concepts" in wanted:
        parts.append('<g id="concepts">')
        n = output.n_proposals
        for i, sb in enumerate(output.added):
            parts.append("  " + _rect(sb.box, PROPOSAL if i < n else EXTRA))
        for cid in output.concepts:
            parts.append("  " + _rect(output.reduced[cid].box, REDUCED, width=2.0, extra=' stroke-dasharray="6 3"'))
        parts.append("</g>")
    if "views" in wanted:
        parts.append('<g id="views">')
        for c in output.crops:
            parts.append(
                "  " + _rect(c.box, VIEW, width=1.5, extra=f" data-bag=\"{c.bag_id}\" data-level=\"{c.level.value}\"")
            )
        parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
