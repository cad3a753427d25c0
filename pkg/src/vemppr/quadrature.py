"""Triangle rules and polygon sub-triangulation.

Rules are Stroud conical products (Gauss-Legendre x Gauss-Jacobi on the
collapsed square). A k x k product is exact to degree 2k - 1.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .mesh import geometry as geo
from .mesh.core import MeshError

DEFAULT_DEGREE = 4
ORACLE_DEGREE = 10


@dataclass(frozen=True)
class QuadratureRule:
    """Barycentric points ``(m, 3)`` and weights summing to 1/2 (reference area)."""

    bary: np.ndarray
    weights: np.ndarray
    degree: int


@lru_cache(maxsize=None)
def triangle_rule(degree=DEFAULT_DEGREE):
    k = max(1, (degree + 2) // 2)
    xs, ws = roots_legendre(k)
    xj, wj = roots_jacobi(k, 1.0, 0.0)
    s = 0.5 * (xs + 1.0)
    t = 0.5 * (xj + 1.0)
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(0.5 * ws, 0.25 * wj)
    xi = (S * (1.0 - T)).ravel()
    eta = T.ravel()
    bary = np.column_stack([1.0 - xi - eta, xi, eta])
    bary.setflags(write=False)
    w = W.ravel()
    w.setflags(write=False)
    return QuadratureRule(bary, w, 2 * k - 1)


def triangulate_cell(pts):
    """Sub-triangles of a polygon as ``(T, 3, 2)``.

    Convex cells use a fan from the area centroid; concave ones are ear-clipped.
    """
    a, c = geo.area_centroid(pts)
    if geo.is_convex(pts):
        nxt = np.roll(pts, -1, axis=0)
        tris = np.stack([np.broadcast_to(c, pts.shape), pts, nxt], axis=1)
    else:
        idx = geo.ear_clip(pts)
        tris = pts[np.array(idx)]
    d = geo.diameter(pts)
    ta = 0.5 * np.abs(geo._orient(tris[:, 0], tris[:, 1], tris[:, 2]))
    keep = ta >= 1e-14 * d * d
    out = tris[keep]
    if abs(ta[keep].sum() - a) > 1e-10 * a:
        raise MeshError("sub-triangulation does not cover the cell")
    return out


def mesh_triangles(mesh):
    """Cached sub-triangulation of all cells: ``(tris, cell_of_tri)``."""
    if "triangles" not in mesh._cache:
        tris, owner = [], []
        for c in range(mesh.n_cells):
            t = triangulate_cell(mesh.cell_points(c))
            tris.append(t)
            owner.append(np.full(len(t), c))
        mesh._cache["triangles"] = (np.concatenate(tris), np.concatenate(owner))
    return mesh._cache["triangles"]


def quadrature_points(mesh, degree=DEFAULT_DEGREE):
    """All quadrature points of the mesh: ``(points (Q, 2), weights (Q,), cell (Q,))``."""
    key = ("qp", degree)
    if key not in mesh._cache:
        tris, owner = mesh_triangles(mesh)
        rule = triangle_rule(degree)
        pts = np.einsum("qk,tkd->tqd", rule.bary, tris)
        e1 = tris[:, 1] - tris[:, 0]
        e2 = tris[:, 2] - tris[:, 0]
        jac = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        w = jac[:, None] * rule.weights[None, :]
        cell = np.repeat(owner, len(rule.weights))
        mesh._cache[key] = (pts.reshape(-1, 2), w.ravel(), cell)
    return mesh._cache[key]


def integrate_cell(mesh, cell_id, g, degree=DEFAULT_DEGREE):
    """Integral of ``g(x, y)`` (vectorised callable) over one cell."""
    tris = triangulate_cell(mesh.cell_points(cell_id))
    rule = triangle_rule(degree)
    pts = np.einsum("qk,tkd->tqd", rule.bary, tris)
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    jac = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    vals = np.asarray(g(pts[..., 0], pts[..., 1]), dtype=float)
    return float(np.sum(jac[:, None] * rule.weights[None, :] * vals))


def integrate_cells(mesh, values_at_points, degree=DEFAULT_DEGREE):
    """Per-cell integrals of precomputed values at :func:`quadrature_points`."""
    _, w, cell = quadrature_points(mesh, degree)
    return np.bincount(cell, weights=w * values_at_points, minlength=mesh.n_cells)
