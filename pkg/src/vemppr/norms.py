"""Error norms evaluated through the element projections.

The virtual functions are unknown inside cells, so every norm goes through
``Pi u_h`` (a linear polynomial per cell).
"""

import numpy as np

from . import quadrature as quad
from . import vem
from .quadrature import QuadratureRule, integrate_cell, triangle_rule

__all__ = [
    "QuadratureRule", "integrate_cell", "triangle_rule", "projected_recovered",
    "grad_error_cells", "grad_error_projected", "recovered_error_cells", "recovered_error",
    "l2_norm_projected", "supercloseness",
]


def _grad_at(exact_grad, pts):
    g = exact_grad(pts[:, 0], pts[:, 1])
    return np.asarray(g[0], dtype=float), np.asarray(g[1], dtype=float)


def projected_recovered(mesh, recovered):
    """Per-cell linear fields ``Pi_E G_h u_h`` as two ``(n_cells, 3)`` coefficient arrays."""
    return vem.project(mesh, recovered.gx), vem.project(mesh, recovered.gy)


def grad_error_cells(mesh, exact_grad, u_dofs, degree=quad.DEFAULT_DEGREE):
    """Squared per-cell ``||grad u - grad Pi u_h||``."""
    pts, w, cell = quad.quadrature_points(mesh, degree)
    coeffs = vem.project(mesh, u_dofs)
    gx, gy = _grad_at(exact_grad, pts)
    ex = gx - coeffs[cell, 1]
    ey = gy - coeffs[cell, 2]
    return np.bincount(cell, weights=w * (ex * ex + ey * ey), minlength=mesh.n_cells)


def grad_error_projected(mesh, exact_grad, u_dofs, degree=quad.DEFAULT_DEGREE):
    """``||grad u - grad Pi u_h||_0`` over the mesh."""
    return float(np.sqrt(grad_error_cells(mesh, exact_grad, u_dofs, degree).sum()))


def recovered_error_cells(mesh, exact_grad, recovered, degree=quad.DEFAULT_DEGREE):
    pts, w, cell = quad.quadrature_points(mesh, degree)
    cx, cy = projected_recovered(mesh, recovered)
    gx, gy = _grad_at(exact_grad, pts)
    ex = gx - vem.evaluate_projection(mesh, cx, pts, cell)
    ey = gy - vem.evaluate_projection(mesh, cy, pts, cell)
    return np.bincount(cell, weights=w * (ex * ex + ey * ey), minlength=mesh.n_cells)


def recovered_error(mesh, exact_grad, recovered, degree=quad.DEFAULT_DEGREE):
    """``||grad u - Pi G_h u_h||_0`` with the recovered field projected cell by cell."""
    return float(np.sqrt(recovered_error_cells(mesh, exact_grad, recovered, degree).sum()))


def l2_norm_projected(mesh, field_x, field_y, degree=quad.DEFAULT_DEGREE):
    """``||Pi (fx, fy)||_0`` for vertex fields, used for boundedness checks."""
    pts, w, cell = quad.quadrature_points(mesh, degree)
    cx, cy = vem.project(mesh, field_x), vem.project(mesh, field_y)
    vx = vem.evaluate_projection(mesh, cx, pts, cell)
    vy = vem.evaluate_projection(mesh, cy, pts, cell)
    return float(np.sqrt(np.sum(w * (vx * vx + vy * vy))))


def supercloseness(A, u_dofs, uI_dofs):
    """Energy distance ``sqrt((u_h - u_I)^T A_h (u_h - u_I))`` on the full stiffness."""
    d = np.asarray(u_dofs, dtype=float) - np.asarray(uI_dofs, dtype=float)
    q = float(d @ (A @ d))
    if q < -1e-13 * max(1.0, float(d @ d)):
        raise ValueError(f"negative energy {q:.3e}: stiffness is not positive semidefinite")
    return float(np.sqrt(max(q, 0.0)))
