"""Benchmark mesh families.

=========  ==================================================================
tag        construction
=========  ==================================================================
t1         n x n unit squares
t2         hexagon tiling with ``n`` columns, clipped to the unit square
t3         chevron tiling: n columns, 2n rows of congruent concave hexagons
t4         t1 with interior vertices jittered by up to 0.25 h per coordinate
t5         t2 pushed through x += sin(2 pi x) sin(2 pi y) / 10 (same for y)
t6         Lloyd-smoothed Voronoi diagram of n^2 random seeds
lshape     squares of side 1/n on (-1, 1)^2 minus (0, 1) x (-1, 0)
=========  ==================================================================
"""

from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.spatial import Voronoi, cKDTree

from . import geometry as geo
from .core import MeshError, build_topology


class MeshFamily(str, Enum):
    T1 = "t1"
    T2 = "t2"
    T3 = "t3"
    T4 = "t4"
    T5 = "t5"
    T6 = "t6"
    LSHAPE = "lshape"


UNIT_SQUARE_FAMILIES = (MeshFamily.T1, MeshFamily.T2, MeshFamily.T3,
                        MeshFamily.T4, MeshFamily.T5, MeshFamily.T6)

PERTURBATION = 0.25
CHEVRON_AMPLITUDE = 0.25
LLOYD_ITERATIONS = 20


def _merge_polygons(polys, tol=1e-10):
    """Turn coordinate polygons into a shared vertex table.

    Points closer than ``tol`` are merged (connected components of KD-tree
    pairs, each represented by its lowest-index point); consecutive
    duplicates and zero-area cells are then dropped.
    """
    pts = np.concatenate(polys)
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    graph = sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
                          shape=(len(pts), len(pts)))
    _, labels = connected_components(graph, directed=False)
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    uniq, inv = first[order], rank[labels]
    verts = pts[uniq]
    cells = []
    off = 0
    for p in polys:
        ids = inv[off:off + len(p)]
        off += len(p)
        out = []
        for v in ids:
            if not out or out[-1] != v:
                out.append(int(v))
        while len(out) > 1 and out[0] == out[-1]:
            out.pop()
        if len(out) >= 3:
            a = geo.signed_area(verts[out])
            if a > 1e-12 * geo.diameter(verts[out]) ** 2:
                cells.append(out)
    used = np.unique(np.concatenate([np.array(c) for c in cells]))
    remap = -np.ones(len(verts), dtype=np.int64)
    remap[used] = np.arange(len(used))
    return verts[used], [remap[c].tolist() for c in cells]


def _snap_box(verts, lo=0.0, hi=1.0, tol=1e-10):
    v = verts.copy()
    for val in (lo, hi):
        v[np.abs(v - val) < tol] = val
    return v


def uniform_quad(n):
    verts = np.array([[i / n, j / n] for j in range(n + 1) for i in range(n + 1)])
    cells = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            cells.append([a, a + 1, a + n + 2, a + n + 1])
    return verts, cells


def hexagonal(n):
    """Pointy-top hexagons, ``n`` per row, clipped to the unit square.

    Row spacing is chosen so an integer number of rows fits the square; the
    cells are regular up to a vertical stretch of a few percent.
    """
    w = 1.0 / n
    m = max(2, int(round(n / (np.sqrt(3.0) / 2.0))))
    dy = 1.0 / m
    polys = []
    for j in range(-1, m + 2):
        shift = 0.5 * w if j % 2 else 0.0
        cy = j * dy
        for i in range(-1, n + 2):
            cx = i * w + shift
            hexa = np.array([
                [cx, cy - 2 * dy / 3], [cx + w / 2, cy - dy / 3], [cx + w / 2, cy + dy / 3],
                [cx, cy + 2 * dy / 3], [cx - w / 2, cy + dy / 3], [cx - w / 2, cy - dy / 3],
            ])
            c = geo.clip_to_box(hexa, 0.0, 1.0, 0.0, 1.0)
            if len(c) >= 3 and geo.signed_area(c) > 1e-12 * w * w:
                polys.append(c)
    return _merge_polygons(polys)


def chevron(n, amplitude=CHEVRON_AMPLITUDE):
    """Columns of width b = 1/n cut by V-shaped polylines every b/2.

    Interior cells are translates of one concave hexagon; the bottom and top
    rows are bounded by the straight domain edges.
    """
    b = 1.0 / n
    a = amplitude * b
    rows = 2 * n
    xs = np.linspace(0.0, 1.0, 2 * n + 1)  # column edges and centres alternate

    def curve_y(k, i):
        # height of curve k at abscissa xs[i]; curves 0 and rows are flat
        base = k / rows
        if k == 0 or k == rows:
            return base
        return base + (a if i % 2 == 0 else 0.0)

    # vertex ids: curve k, abscissa index i
    idx = {}
    verts = []
    for k in range(rows + 1):
        for i in range(2 * n + 1):
            idx[k, i] = len(verts)
            verts.append((xs[i], curve_y(k, i)))
    cells = []
    for k in range(rows):
        for c in range(n):
            i0, im, i1 = 2 * c, 2 * c + 1, 2 * c + 2
            cells.append([idx[k, i0], idx[k, im], idx[k, i1],
                          idx[k + 1, i1], idx[k + 1, im], idx[k + 1, i0]])
    verts = np.array(verts)
    # on the flat curves the centre vertex is collinear; drop it from cells
    out = []
    for cell in cells:
        pts = verts[cell]
        keep = [v for k, v in enumerate(cell)
                if not geo.is_straight(pts[k - 1], pts[k], pts[(k + 1) % len(cell)])]
        out.append(keep)
    used = np.unique(np.concatenate(out))
    remap = -np.ones(len(verts), dtype=np.int64)
    remap[used] = np.arange(len(used))
    return verts[used], [remap[c].tolist() for c in out]


def perturbed_quad(n, seed, rho=PERTURBATION, max_retries=50):
    verts, cells = uniform_quad(n)
    rng = np.random.default_rng(seed)
    h = 1.0 / n
    vcells = [[] for _ in range(len(verts))]
    for ci, c in enumerate(cells):
        for v in c:
            vcells[v].append(ci)
    for v in range(len(verts)):
        x, y = verts[v]
        if x in (0.0, 1.0) or y in (0.0, 1.0):
            continue
        base = verts[v].copy()
        for _ in range(max_retries):
            verts[v] = base + rng.uniform(-rho * h, rho * h, size=2)
            if all(geo.signed_area(verts[cells[c]]) > 0 and geo.is_simple(verts[cells[c]])
                   for c in vcells[v]):
                break
        else:
            raise MeshError(f"could not perturb vertex {v} without tangling a cell")
    return verts, cells


def sine_transform(verts):
    x, y = verts[:, 0], verts[:, 1]
    s = 0.1 * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    out = np.column_stack([x + s, y + s])
    # the map fixes the boundary; keep it exact
    on_b = (x == 0) | (x == 1) | (y == 0) | (y == 1)
    out[on_b] = verts[on_b]
    return out


def _reflected_voronoi(points):
    """Voronoi regions of ``points`` bounded by the unit square via reflection."""
    p = points
    mirrors = [p,
               np.column_stack([-p[:, 0], p[:, 1]]),
               np.column_stack([2 - p[:, 0], p[:, 1]]),
               np.column_stack([p[:, 0], -p[:, 1]]),
               np.column_stack([p[:, 0], 2 - p[:, 1]])]
    vor = Voronoi(np.concatenate(mirrors))
    polys = []
    for i in range(len(p)):
        reg = vor.regions[vor.point_region[i]]
        if -1 in reg or not reg:
            raise MeshError("unbounded Voronoi region for an interior seed")
        poly = vor.vertices[reg]
        ang = np.arctan2(poly[:, 1] - p[i, 1], poly[:, 0] - p[i, 0])
        poly = np.clip(poly[np.argsort(ang)], 0.0, 1.0)
        polys.append(poly)
    return polys


def lloyd_points(n, seed, iterations=LLOYD_ITERATIONS):
    """Seeds after ``iterations`` Lloyd steps (the generators of the final diagram)."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, size=(n * n, 2))
    for _ in range(iterations):
        polys = _reflected_voronoi(pts)
        pts = np.array([geo.area_centroid(q)[1] for q in polys])
    return pts


def voronoi(n, seed, iterations=LLOYD_ITERATIONS):
    pts = lloyd_points(n, seed, iterations)
    verts, cells = _merge_polygons(_reflected_voronoi(pts))
    return _snap_box(verts), cells


def lshape(n):
    h = 1.0 / n
    polys = []
    for j in range(2 * n):
        for i in range(2 * n):
            x0, y0 = -1.0 + i * h, -1.0 + j * h
            if x0 >= -1e-12 and y0 < -1e-12:
                continue
            polys.append(np.array([[x0, y0], [x0 + h, y0], [x0 + h, y0 + h], [x0, y0 + h]]))
    verts, cells = _merge_polygons(polys)
    verts = np.round(verts * n) / n
    return verts, cells


def generate(family, n, seed=0):
    """Build a benchmark mesh; the result is a pure function of ``(family, n, seed)``."""
    family = MeshFamily(str(family).lower() if not isinstance(family, MeshFamily) else family)
    n = int(n)
    if n < 2:
        raise ValueError("n must be at least 2")
    if family is MeshFamily.T1:
        verts, cells = uniform_quad(n)
    elif family is MeshFamily.T2:
        verts, cells = hexagonal(n)
    elif family is MeshFamily.T3:
        verts, cells = chevron(n)
    elif family is MeshFamily.T4:
        verts, cells = perturbed_quad(n, seed)
    elif family is MeshFamily.T5:
        verts, cells = hexagonal(n)
        verts = sine_transform(verts)
    elif family is MeshFamily.T6:
        verts, cells = voronoi(n, seed)
    else:
        verts, cells = lshape(n)
    meta = {"family": family.value, "n": n, "seed": int(seed)}
    if family is MeshFamily.T6:
        meta["lloyd_iterations"] = LLOYD_ITERATIONS
    if family is MeshFamily.T4:
        meta["perturbation"] = PERTURBATION
    return build_topology(verts, cells, meta=meta)
