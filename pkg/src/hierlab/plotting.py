"""Minimal SVG scatter of a two-dimensional Poincare embedding."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
UNLABELLED = "#b0b0b0"


def disk_svg(points, labels=None, size=600, radius=2.0, c=1.0, title=None) -> str:
    """SVG text drawing the unit disk boundary and one dot per node.

    Points are scaled by sqrt(c) so the ball boundary maps onto the drawn
    circle. Nodes with a negative or missing label are grey.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("disk plot needs a two-dimensional embedding")
    half = size / 2.0
    r = half - 10.0
    xy = pts * np.sqrt(c)
    cx = half + r * xy[:, 0]
    cy = half - r * xy[:, 1]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<circle cx="{half}" cy="{half}" r="{r}" fill="white" stroke="black" stroke-width="1"/>']
    if title:
        out.append(f'<title>{escape(title)}</title>')
    for i in range(len(pts)):
        lab = -1 if labels is None else int(labels[i])
        color = PALETTE[lab % len(PALETTE)] if lab >= 0 else UNLABELLED
        out.append(f'<circle cx="{cx[i]:.2f}" cy="{cy[i]:.2f}" r="{radius}" fill="{color}" '
                   f'fill-opacity="0.8"><title>{i}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


__all__ = ["disk_svg"]
