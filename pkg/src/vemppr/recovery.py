"""Polynomial-preserving gradient recovery on polygonal meshes.

For every vertex a patch of element layers is grown until a quadratic can
be fitted uniquely (in the least-squares sense) to the vertex values of the
patch. The recovered gradient at the vertex is the gradient of that fit.
All fitting happens in coordinates shifted to the vertex and scaled by the
patch size, so the conditioning check is independent of the mesh size.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

COND_LIMIT = 1e8
MIN_SAMPLES = 6


class RecoveryError(RuntimeError):
    pass


@dataclass(frozen=True)
class VertexPatch:
    vertex_id: int
    layers: int
    cells: tuple
    samples: np.ndarray  # vertex ids, origin vertex included, de-duplicated
    h: float


@dataclass(frozen=True)
class FittedQuadratic:
    """Fit ``p(xi, eta) = a1 + a2 xi + a3 eta + a4 xi^2 + a5 xi eta + a6 eta^2``.

    ``(xi, eta) = (z - origin) / h``.
    """

    coeffs: np.ndarray
    origin: np.ndarray
    h: float

    def physical_coeffs(self):
        """Coefficients of ``(1, x, y, x^2, xy, y^2)`` in shifted physical coordinates.

        The fit is developed around ``origin``; i.e. these multiply
        ``(1, x - x_i, y - y_i, ...)``.
        """
        h = self.h
        return self.coeffs / np.array([1.0, h, h, h * h, h * h, h * h])

    def __call__(self, x, y):
        xi = (np.asarray(x) - self.origin[0]) / self.h
        eta = (np.asarray(y) - self.origin[1]) / self.h
        a = self.coeffs
        return a[0] + a[1] * xi + a[2] * eta + a[3] * xi ** 2 + a[4] * xi * eta + a[5] * eta ** 2


@dataclass
class RecoveredField:
    gx: np.ndarray
    gy: np.ndarray

    def as_array(self):
        return np.column_stack([self.gx, self.gy])


def scaled_vandermonde(points, origin, h):
    q = (np.asarray(points) - origin) / h
    xi, eta = q[:, 0], q[:, 1]
    return np.column_stack([np.ones(len(q)), xi, eta, xi * xi, xi * eta, eta * eta])


def _patch_geometry(mesh, samples, vertex_id):
    pts = mesh.vertices[samples]
    d = pts[:, None, :] - pts[None, :, :]
    h = float(np.sqrt((d ** 2).sum(-1).max()))
    return scaled_vandermonde(pts, mesh.vertices[vertex_id], h), h


def condition_number(Ahat):
    s = np.linalg.svd(Ahat, compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else np.inf


def rank_condition(points, origin, cond_limit=COND_LIMIT):
    """Rank test on a bare sample set: at least six points and cond(A_hat) <= limit."""
    points = np.asarray(points, dtype=float)
    if len(points) < MIN_SAMPLES:
        return False
    d = points[:, None, :] - points[None, :, :]
    h = float(np.sqrt((d ** 2).sum(-1).max()))
    return condition_number(scaled_vandermonde(points, origin, h)) <= cond_limit


def satisfies_rank(patch, mesh, cond_limit=COND_LIMIT):
    """Unique least-squares quadratic on the patch: full column rank, cond <= limit."""
    return rank_condition(mesh.vertices[patch.samples], mesh.vertices[patch.vertex_id],
                          cond_limit)


def layer(mesh, vertex_id, n):
    """Cells of ``L(z, n)``: first layer touches z, later layers share an edge."""
    cells = set(mesh.vertex_cells[vertex_id])
    for _ in range(n - 1):
        cells = _grow(mesh, cells)
    return cells


def build_patch(mesh, vertex_id, cond_limit=COND_LIMIT):
    """Smallest layered patch around a vertex that passes the rank test.

    Growth starts at one layer for interior vertices and two for boundary
    vertices.
    """
    n = 2 if mesh.boundary_vertex_flags[vertex_id] else 1
    cells = set(mesh.vertex_cells[vertex_id])
    for _ in range(n - 1):
        cells = _grow(mesh, cells)
    while True:
        samples = np.unique(np.concatenate([mesh.cells[c] for c in cells]))
        _, h = _patch_geometry(mesh, samples, vertex_id)
        patch = VertexPatch(int(vertex_id), n, tuple(sorted(cells)), samples, h)
        if satisfies_rank(patch, mesh, cond_limit):
            return patch
        grown = _grow(mesh, cells)
        if grown == cells:
            raise RecoveryError(
                f"patch of vertex {vertex_id} covers the whole mesh without meeting the "
                "rank condition; the mesh is too coarse"
            )
        cells = grown
        n += 1


def _grow(mesh, cells):
    grown = set(cells)
    for c in cells:
        for a, b in mesh.cell_edges(c):
            grown.update(mesh.edge_cells[(min(a, b), max(a, b))])
    return grown


def fit_quadratic(patch, dofs, mesh, cond_limit=COND_LIMIT):
    """Least-squares quadratic through the patch samples via QR."""
    Ahat, h = _patch_geometry(mesh, patch.samples, patch.vertex_id)
    b = np.asarray(dofs, dtype=float)[patch.samples]
    Q, R = sla.qr(Ahat, mode="economic")
    diag = np.abs(np.diag(R))
    if diag.min() <= diag.max() / cond_limit:
        raise RecoveryError(
            f"patch of vertex {patch.vertex_id} is numerically rank deficient "
            f"(cond ~ {condition_number(Ahat):.3e})"
        )
    a = sla.solve_triangular(R, Q.T @ b)
    return FittedQuadratic(a, mesh.vertices[patch.vertex_id].copy(), h)


def recover_vertex(fit):
    return fit.coeffs[1] / fit.h, fit.coeffs[2] / fit.h


def recovery_operator(mesh, cond_limit=COND_LIMIT):
    """Sparse ``(2 nv, nv)`` matrix: rows ``[0, nv)`` give gx, ``[nv, 2 nv)`` gy.

    The fit is linear in the data, so the gradient at each vertex is a fixed
    weighted sum of the sample values. Cached per mesh.
    """
    key = ("recovery", cond_limit)
    if key in mesh._cache:
        return mesh._cache[key]
    nv = mesh.n_vertices
    rows, cols, vals = [], [], []
    layers = np.empty(nv, dtype=np.int64)
    for v in range(nv):
        patch = build_patch(mesh, v, cond_limit)
        layers[v] = patch.layers
        Ahat, h = _patch_geometry(mesh, patch.samples, v)
        Q, R = sla.qr(Ahat, mode="economic")
        W = sla.solve_triangular(R, Q.T)  # (6, m): coefficients = W @ b
        m = len(patch.samples)
        rows.append(np.full(m, v))
        cols.append(patch.samples)
        vals.append(W[1] / h)
        rows.append(np.full(m, nv + v))
        cols.append(patch.samples)
        vals.append(W[2] / h)
    Gop = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                        shape=(2 * nv, nv))
    mesh._cache[key] = Gop
    mesh._cache["patch_layers"] = layers
    return Gop


def recover_field(mesh, dofs):
    """Recovered gradient at every vertex: build patch, fit, differentiate at the vertex."""
    g = recovery_operator(mesh) @ np.asarray(dofs, dtype=float)
    nv = mesh.n_vertices
    return RecoveredField(g[:nv].copy(), g[nv:].copy())


def write_csv(mesh, field, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex_id", "x", "y", "gx", "gy"])
        for i, ((x, y), gx, gy) in enumerate(zip(mesh.vertices, field.gx, field.gy)):
            w.writerow([i, repr(float(x)), repr(float(y)), repr(float(gx)), repr(float(gy))])
    return path
