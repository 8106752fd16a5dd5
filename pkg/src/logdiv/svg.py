"""Plain SVG rendering of the 2-simplex.

A composition ``p = (p1, p2, p3)`` is drawn at the barycentric embedding
``x = p2 + p3 / 2``, ``y = sqrt(3)/2 * p3`` (vertices ``(0, 0)``, ``(1, 0)``,
``(1/2, sqrt(3)/2)``). Coordinates are written with ``repr`` so they read
back exactly; the figure group flips the y axis.

Element classes: ``simplex`` (outline), ``data`` (circles), ``subspace``
(blue curve), ``geodesic`` (grey segments, one polyline per projected point,
``data-index`` = row), ``baseline`` (red Aitchison curve).
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

from .errors import DomainError

_H = np.sqrt(3.0) / 2.0
_NS = "http://www.w3.org/2000/svg"


def to_plane(p) -> np.ndarray:
    p = np.atleast_2d(np.asarray(p, dtype=float))
    if p.shape[1] != 3:
        raise DomainError("SVG output supports three-part compositions only")
    return np.column_stack([p[:, 1] + 0.5 * p[:, 2], _H * p[:, 2]])


def from_plane(xy) -> np.ndarray:
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    p3 = xy[:, 1] / _H
    p2 = xy[:, 0] - 0.5 * p3
    return np.column_stack([1.0 - p2 - p3, p2, p3])


def _pts(p):
    return " ".join(f"{x!r},{y!r}" for x, y in to_plane(p).tolist())


def render_simplex(data=None, geodesics=(), subspace=None, baseline=None, title="", labels=("p1", "p2", "p3")) -> str:
    """Render the figure and return the SVG document as a string.

    ``geodesics`` is a sequence of ``(index, compositions)`` pairs, each an
    ``(m, 3)`` array of points along one segment.
    """
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="{_NS}" viewBox="-0.08 -0.95 1.16 1.05" width="600" height="543">',
    ]
    if title:
        out.append(f"<title>{_escape(title)}</title>")
    out.append('<g transform="scale(1,-1)" fill="none" stroke-linecap="round">')
    out.append(
        f'<polygon class="simplex" points="0.0,0.0 1.0,0.0 0.5,{_H!r}" stroke="black" stroke-width="0.003"/>'
    )
    if baseline is not None and len(baseline):
        out.append(f'<polyline class="baseline" points="{_pts(baseline)}" stroke="red" stroke-width="0.003"/>')
    for idx, seg in geodesics:
        out.append(
            f'<polyline class="geodesic" data-index="{int(idx)}" points="{_pts(seg)}" '
            'stroke="grey" stroke-width="0.002"/>'
        )
    if subspace is not None and len(subspace):
        out.append(f'<polyline class="subspace" points="{_pts(subspace)}" stroke="blue" stroke-width="0.005"/>')
    if data is not None and len(data):
        for x, y in to_plane(data).tolist():
            out.append(f'<circle class="data" cx="{x!r}" cy="{y!r}" r="0.006" stroke="black" stroke-width="0.002"/>')
    out.append("</g>")
    for (x, y), lab in zip([(-0.04, 0.04), (1.01, 0.04), (0.47, -0.89)], labels):
        out.append(f'<text x="{x}" y="{y}" font-size="0.035">{_escape(lab)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def read_polylines(svg_text, cls):
    """``[(attributes, compositions)]`` for every polyline of class ``cls``."""
    root = ET.fromstring(svg_text)
    found = []
    for el in root.iter(f"{{{_NS}}}polyline"):
        if el.get("class") != cls:
            continue
        xy = np.array([[float(v) for v in pair.split(",")] for pair in el.get("points").split()])
        found.append((dict(el.attrib), from_plane(xy)))
    return found


def read_circles(svg_text, cls="data") -> np.ndarray:
    root = ET.fromstring(svg_text)
    xy = [
        (float(el.get("cx")), float(el.get("cy")))
        for el in root.iter(f"{{{_NS}}}circle")
        if el.get("class") == cls
    ]
    return from_plane(np.array(xy).reshape(-1, 2))
