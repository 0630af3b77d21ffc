"""Static SVG phase portrait of the Poincare ball.

Hand-rolled SVG output: byte-identical files for identical inputs, no
plotting dependency.  The ball is drawn in orthographic projection along
the diagonal view axis, so the unit sphere's silhouette is the unit
circle; equilibria are markers (shape by stability) and trajectories are
polylines of their ball coordinates.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["ball_portrait_svg"]

_SIZE = 640
_MARGIN = 40

_VIEW = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
_E1 = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)
_E2 = np.cross(_VIEW, _E1)

_STABILITY_STYLE = {
    "attractor": ("#1a6fb0", "#1a6fb0"),
    "repeller": ("#c03a2b", "none"),
    "saddle": ("#8a27a8", "none"),
    "nonhyperbolic": ("#777777", "none"),
}


def _project(u) -> tuple[float, float]:
    u = np.asarray(u, dtype=float)
    x = float(u @ _E1)
    y = float(u @ _E2)
    half = _SIZE / 2
    scale = half - _MARGIN
    return half + scale * x, half - scale * y


def ball_portrait_svg(equilibria, trajectories) -> str:
    """Render equilibria and ball-coordinate trajectories to an SVG string.

    equilibria: iterables with ``direction`` (unit 3-vector), ``stability``
    and ``first_octant`` attributes.  trajectories: sequences of (N, 3)
    ball-coordinate arrays.
    """
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
        f'viewBox="0 0 {_SIZE} {_SIZE}">',
        f'<rect width="{_SIZE}" height="{_SIZE}" fill="white"/>',
    ]
    cx = cy = _SIZE / 2
    r = _SIZE / 2 - _MARGIN
    parts.append(
        f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="{r:.1f}" fill="none" '
        f'stroke="#222222" stroke-width="1.5"/>'
    )
    for states in trajectories:
        pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in (_project(u) for u in states))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="#2e8540" '
            f'stroke-width="1.2" stroke-opacity="0.85"/>'
        )
    for eq in equilibria:
        x, y = _project(eq.direction)
        stroke, fill = _STABILITY_STYLE.get(eq.stability, ("#000000", "none"))
        size = 7.0 if eq.first_octant else 5.0
        if eq.stability == "saddle":
            parts.append(
                f'<path d="M {x - size:.3f} {y:.3f} L {x:.3f} {y - size:.3f} '
                f'L {x + size:.3f} {y:.3f} L {x:.3f} {y + size:.3f} Z" '
                f'fill="{fill}" stroke="{stroke}" stroke-width="1.6"/>'
            )
        else:
            parts.append(
                f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{size:.3f}" '
                f'fill="{fill}" stroke="{stroke}" stroke-width="1.6"/>'
            )
    parts.append(
        f'<text x="{_MARGIN:.0f}" y="{_SIZE - 12}" font-family="monospace" font-size="12" '
        f'fill="#333333">unit-ball portrait: equilibria at infinity and trajectories</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
