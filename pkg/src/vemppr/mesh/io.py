"""Mesh JSON files and SVG snapshots.

JSON layout::

    {"vertices": [[x, y], ...], "cells": [[i, j, k, ...], ...],
     "meta": {"family": ..., "n": ..., "seed": ...}}
"""

import json
from pathlib import Path

import numpy as np

from .core import build_topology


def mesh_to_dict(mesh):
    return {
        "vertices": [[float(x), float(y)] for x, y in mesh.vertices],
        "cells": [[int(v) for v in c] for c in mesh.cells],
        "meta": mesh.meta,
    }


def mesh_from_dict(data):
    return build_topology(data["vertices"], data["cells"], meta=data.get("meta"))


def save_json(mesh, path):
    path = Path(path)
    # repr-exact floats keep round trips bit-identical
    path.write_text(json.dumps(mesh_to_dict(mesh), sort_keys=True) + "\n")
    return path


def load_json(path):
    return mesh_from_dict(json.loads(Path(path).read_text()))


def _colormap(t):
    # blue -> white -> red, the usual diverging ramp for error indicators
    t = float(np.clip(t, 0.0, 1.0))
    if t < 0.5:
        s = t / 0.5
        r, g, b = s, s, 1.0
    else:
        s = (t - 0.5) / 0.5
        r, g, b = 1.0, 1.0 - s, 1.0 - s
    return "#%02x%02x%02x" % (int(255 * r), int(255 * g), int(255 * b))


def to_svg(mesh, values=None, size=600, stroke_width=0.6, stroke="#222222",
           log_scale=False, margin=10):
    """Render cells as closed paths; optional per-cell fill from ``values``."""
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    span = float((hi - lo).max()) or 1.0
    scale = (size - 2 * margin) / span
    height = int(round((hi[1] - lo[1]) * scale + 2 * margin))
    width = int(round((hi[0] - lo[0]) * scale + 2 * margin))

    def xy(p):
        return (margin + (p[0] - lo[0]) * scale, height - margin - (p[1] - lo[1]) * scale)

    fills = None
    if values is not None:
        v = np.asarray(values, dtype=float)
        if log_scale:
            v = np.log10(np.maximum(v, 1e-300))
        vmin, vmax = float(v.min()), float(v.max())
        t = (v - vmin) / (vmax - vmin) if vmax > vmin else np.zeros_like(v)
        fills = [_colormap(x) for x in t]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">']
    for c, cell in enumerate(mesh.cells):
        pts = [xy(mesh.vertices[v]) for v in cell]
        d = "M " + " L ".join(f"{x:.3f} {y:.3f}" for x, y in pts) + " Z"
        fill = fills[c] if fills is not None else "none"
        out.append(f'<path d="{d}" fill="{fill}" stroke="{stroke}" '
                   f'stroke-width="{stroke_width}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(mesh, path, **kwargs):
    path = Path(path)
    path.write_text(to_svg(mesh, **kwargs))
    return path
