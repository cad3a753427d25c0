"""Lowest-order virtual element discretisation of the Poisson problem.

Only vertex values are available. Each element carries the projection
``Pi`` onto linear polynomials (the gradient- and L2-projections coincide
at this order) and the stabilised stiffness

    K = |E| G^T G + (I - D P)^T (I - D P)

where ``G`` holds the projected gradients of the local basis functions,
``P`` the projection coefficients in the scaled basis {1, x - xc, y - yc}
and ``D`` evaluates that basis at the vertices.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.sparse as sp

from . import quadrature as quad

# recorded in run metadata; the stabilisation only affects constants, not rates
STABILIZATION = "dofi-dofi, unit scaling"
from .mesh.core import MeshError


@dataclass(frozen=True)
class LinearPoly:
    """``p(x, y) = c0 + cx (x - x0) + cy (y - y0)`` with ``origin = (x0, y0)``."""

    c0: float
    cx: float
    cy: float
    origin: tuple = (0.0, 0.0)

    def __call__(self, x, y):
        return self.c0 + self.cx * (x - self.origin[0]) + self.cy * (y - self.origin[1])

    @property
    def gradient(self):
        return np.array([self.cx, self.cy])

    def monomial(self):
        """Coefficients ``(a0, ax, ay)`` of ``a0 + ax x + ay y``."""
        x0, y0 = self.origin
        return (self.c0 - self.cx * x0 - self.cy * y0, self.cx, self.cy)


@dataclass
class LocalElement:
    cell_id: int
    vertex_ids: np.ndarray
    area: float
    centroid: np.ndarray
    normals: np.ndarray  # outward unit normals per edge k: v_k -> v_{k+1}
    lengths: np.ndarray
    G: np.ndarray  # (2, N) gradients of Pi phi_j
    P: np.ndarray  # (3, N) coefficients of Pi phi_j in {1, x - xc, y - yc}
    K: np.ndarray = field(repr=False)

    @property
    def n(self):
        return len(self.vertex_ids)


def local_element(mesh, cell_id):
    ids = np.asarray(mesh.cells[cell_id])
    pts = mesh.vertices[ids]
    area = float(mesh.areas[cell_id])
    if area <= 1e-14 * float(mesh.diameters[cell_id]) ** 2:
        raise MeshError(f"cell {cell_id} is degenerate")
    xc = mesh.centroids[cell_id]
    N = len(ids)
    e = np.roll(pts, -1, axis=0) - pts
    lengths = np.hypot(e[:, 0], e[:, 1])
    scaled_n = np.column_stack([e[:, 1], -e[:, 0]])  # |e| * outward normal for CCW
    # grad Pi phi_j = (1 / 2|E|) (|e_{j-1}| n_{j-1} + |e_j| n_j)
    G = (0.5 / area) * (scaled_n + np.roll(scaled_n, 1, axis=0)).T
    vbar = pts.mean(axis=0)
    P = np.empty((3, N))
    P[1:] = G
    P[0] = 1.0 / N - (vbar - xc) @ G
    D = np.column_stack([np.ones(N), pts - xc])
    R = np.eye(N) - D @ P
    K = area * (G.T @ G) + R.T @ R
    K = 0.5 * (K + K.T)
    return LocalElement(cell_id, ids, area, xc.copy(), scaled_n / lengths[:, None], lengths,
                        G, P, K)


def local_elements(mesh):
    if "elements" not in mesh._cache:
        mesh._cache["elements"] = [local_element(mesh, c) for c in range(mesh.n_cells)]
    return mesh._cache["elements"]


def pi_nabla(elem, local_dofs):
    """Projection of the virtual function with the given vertex values onto P1."""
    b = elem.P @ np.asarray(local_dofs, dtype=float)
    return LinearPoly(float(b[0]), float(b[1]), float(b[2]), tuple(elem.centroid))


def local_stiffness(elem):
    return elem.K


def projection_matrix(mesh):
    """Sparse ``(3 * n_cells, n_vertices)`` map from dofs to per-cell Pi coefficients.

    Rows ``3c, 3c+1, 3c+2`` give value at the centroid and the two gradient
    components of ``Pi u`` on cell ``c``.
    """
    if "pmat" not in mesh._cache:
        rows, cols, vals = [], [], []
        for el in local_elements(mesh):
            N = el.n
            for k in range(3):
                rows.append(np.full(N, 3 * el.cell_id + k))
                cols.append(el.vertex_ids)
                vals.append(el.P[k])
        M = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(3 * mesh.n_cells, mesh.n_vertices))
        mesh._cache["pmat"] = M
    return mesh._cache["pmat"]


def project(mesh, dofs):
    """Per-cell coefficients ``(n_cells, 3)`` of ``Pi u`` in {1, x - xc, y - yc}."""
    return (projection_matrix(mesh) @ np.asarray(dofs, dtype=float)).reshape(-1, 3)


def evaluate_projection(mesh, coeffs, points, cell):
    """Value of the piecewise linear ``Pi u`` at points belonging to ``cell``."""
    d = points - mesh.centroids[cell]
    c = coeffs[cell]
    return c[:, 0] + c[:, 1] * d[:, 0] + c[:, 2] * d[:, 1]


def stiffness_matrix(mesh):
    """Global stabilised stiffness on all vertex dofs (no boundary conditions)."""
    if "stiffness" not in mesh._cache:
        rows, cols, vals = [], [], []
        for el in local_elements(mesh):
            ids = el.vertex_ids
            rows.append(np.repeat(ids, el.n))
            cols.append(np.tile(ids, el.n))
            vals.append(el.K.ravel())
        A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(mesh.n_vertices, mesh.n_vertices))
        A.sum_duplicates()
        mesh._cache["stiffness"] = A
    return mesh._cache["stiffness"]


def load_vector(mesh, f, degree=quad.DEFAULT_DEGREE):
    """``b_i = sum_E (f, Pi phi_i)_E`` by sub-triangle quadrature."""
    pts, w, cell = quad.quadrature_points(mesh, degree)
    fv = np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float) * np.ones(len(pts))
    d = pts - mesh.centroids[cell]
    moments = np.column_stack([
        np.bincount(cell, weights=w * fv, minlength=mesh.n_cells),
        np.bincount(cell, weights=w * fv * d[:, 0], minlength=mesh.n_cells),
        np.bincount(cell, weights=w * fv * d[:, 1], minlength=mesh.n_cells),
    ])
    return projection_matrix(mesh).T @ moments.ravel()


@dataclass
class SparseSystem:
    """Dirichlet-reduced system ``A_ff x_f = b_f``.

    ``matrix``/``rhs`` are the full (unreduced) stiffness and load; the
    reduced pieces live in ``A``/``b`` and are solved for ``free`` dofs.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    free: np.ndarray
    dirichlet: np.ndarray
    dirichlet_values: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray

    def expand(self, x_free):
        u = np.empty(len(self.rhs))
        u[self.free] = x_free
        u[self.dirichlet] = self.dirichlet_values
        return u

    @property
    def dirichlet_map(self):
        return dict(zip(self.dirichlet.tolist(), self.dirichlet_values.tolist()))


def assemble(mesh, f, g=None, degree=quad.DEFAULT_DEGREE):
    """Assemble and symmetrically eliminate Dirichlet data ``g`` on the boundary."""
    A = stiffness_matrix(mesh)
    b = load_vector(mesh, f, degree)
    bnd = mesh.boundary_vertices
    free = np.flatnonzero(~mesh.boundary_vertex_flags)
    if g is None:
        gv = np.zeros(len(bnd))
    else:
        p = mesh.vertices[bnd]
        gv = np.asarray(g(p[:, 0], p[:, 1]), dtype=float) * np.ones(len(bnd))
    A_ff = A[free][:, free].tocsr()
    b_f = b[free] - A[free][:, bnd] @ gv
    return SparseSystem(A, b, free, bnd, gv, A_ff, b_f)


def interpolate(u, mesh):
    """Vertex values of ``u`` (the virtual-element interpolant)."""
    v = mesh.vertices
    return np.asarray(u(v[:, 0], v[:, 1]), dtype=float) * np.ones(mesh.n_vertices)


def write_matrix_market(A, path):
    scipy.io.mmwrite(str(path), sp.csr_matrix(A))
    return path
