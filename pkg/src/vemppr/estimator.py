"""Recovery-based error indicators, effectivity index and bulk marking."""

from dataclasses import dataclass

import numpy as np

from . import quadrature as quad
from . import vem
from .norms import grad_error_projected, projected_recovered

DEFAULT_THETA = 0.4


class EstimatorError(ValueError):
    pass


@dataclass
class IndicatorSet:
    eta: np.ndarray
    eta_global: float
    theta: float
    marked: list


def indicators(mesh, u_dofs, recovered, degree=quad.DEFAULT_DEGREE):
    """All ``eta_E = ||Pi_E G_h u_h - grad Pi_E u_h||_E``."""
    pts, w, cell = quad.quadrature_points(mesh, degree)
    cu = vem.project(mesh, u_dofs)
    cx, cy = projected_recovered(mesh, recovered)
    ex = vem.evaluate_projection(mesh, cx, pts, cell) - cu[cell, 1]
    ey = vem.evaluate_projection(mesh, cy, pts, cell) - cu[cell, 2]
    sq = np.bincount(cell, weights=w * (ex * ex + ey * ey), minlength=mesh.n_cells)
    return np.sqrt(np.maximum(sq, 0.0))


def local_indicator(mesh, elem, u_dofs, recovered, degree=quad.DEFAULT_DEGREE):
    """Indicator of a single element (``elem`` is a cell id or a LocalElement)."""
    c = elem.cell_id if isinstance(elem, vem.LocalElement) else int(elem)
    el = vem.local_elements(mesh)[c]
    ids = el.vertex_ids
    gu = el.G @ np.asarray(u_dofs, dtype=float)[ids]
    px = vem.pi_nabla(el, recovered.gx[ids])
    py = vem.pi_nabla(el, recovered.gy[ids])

    def integrand(x, y):
        return (px(x, y) - gu[0]) ** 2 + (py(x, y) - gu[1]) ** 2

    return float(np.sqrt(max(quad.integrate_cell(mesh, c, integrand, degree), 0.0)))


def global_indicator(eta):
    return float(np.sqrt(np.sum(np.asarray(eta) ** 2)))


def effectivity(mesh, exact_grad, u_dofs, recovered, degree=quad.DEFAULT_DEGREE):
    """Ratio of the estimated to the true projected gradient error."""
    num = global_indicator(indicators(mesh, u_dofs, recovered, degree))
    den = grad_error_projected(mesh, exact_grad, u_dofs, degree)
    if den <= 1e-14 * max(1.0, num):
        raise EstimatorError("true error vanishes; the effectivity index is undefined")
    return num / den


def bulk_criterion(selected_sq, total_sq, theta):
    # shared predicate for marking and its brute-force check
    return selected_sq >= theta * theta * total_sq


def dorfler_mark(eta, theta=DEFAULT_THETA):
    """Smallest set of cells carrying a ``theta`` share of the estimate.

    Cells are taken by decreasing indicator (ties by increasing id) until
    ``sqrt(sum of selected eta^2) >= theta * sqrt(sum of all eta^2)``.
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")
    eta = np.asarray(eta, dtype=float)
    sq = eta * eta
    total = float(sq.sum())
    if total == 0.0:
        return []
    order = np.lexsort((np.arange(len(eta)), -eta))
    acc = np.cumsum(sq[order])
    # compare against the sum in the same order so theta = 1 is reachable
    k = int(np.argmax(bulk_criterion(acc, acc[-1], theta)))
    marked = order[:k + 1]
    return sorted(int(c) for c in marked if sq[c] > 0.0)


def estimate(mesh, u_dofs, recovered, theta=DEFAULT_THETA):
    eta = indicators(mesh, u_dofs, recovered)
    return IndicatorSet(eta, global_indicator(eta), theta, dorfler_mark(eta, theta))
