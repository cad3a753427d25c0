from math import factorial

import numpy as np
import pytest
import sympy
from numpy.polynomial import polynomial as P

from _helpers import single_cell
from vemppr import bench, norms, quadrature, recovery, vem
from vemppr.mesh import generate
from vemppr.mesh import geometry as geo
from vemppr.recovery import RecoveredField


def random_star_polygon(rng, k):
    """Star-shaped (often concave) polygon in the positive quadrant."""
    def gaps(t):
        return np.diff(np.r_[t, t[0] + 2 * np.pi])

    t = np.sort(rng.uniform(0, 2 * np.pi, k))
    # star-shaped about the centre needs every angular gap below pi
    while gaps(t).min() < 0.15 or gaps(t).max() >= 0.9 * np.pi:
        t = np.sort(rng.uniform(0, 2 * np.pi, k))
    r = rng.uniform(0.3, 1.0, k)
    return np.column_stack([1.5 + r * np.cos(t), 1.5 + r * np.sin(t)])


def monomial_oracle(pts, a, b):
    """int x^a y^b dA = closed integral x^(a+1) y^b / (a+1) dy, exact per edge."""
    total = 0.0
    for k in range(len(pts)):
        (x0, y0), (x1, y1) = pts[k], pts[(k + 1) % len(pts)]
        px = P.polypow([x0, x1 - x0], a + 1)
        py = P.polypow([y0, y1 - y0], b)
        poly = P.polyint(P.polymul(px, py) * (y1 - y0) / (a + 1))
        total += P.polyval(1.0, poly) - P.polyval(0.0, poly)
    return total


def test_rule_weights_and_exactness_on_reference_triangle():
    for deg in (1, 2, 4, 6, 10):
        rule = quadrature.triangle_rule(deg)
        assert rule.degree >= deg
        assert rule.weights.sum() == pytest.approx(0.5, abs=1e-15)
        xi, eta = rule.bary[:, 1], rule.bary[:, 2]
        # int_T xi^a eta^b = a! b! / (a + b + 2)!
        for a in range(deg + 1):
            for b in range(deg + 1 - a):
                exact = factorial(a) * factorial(b) / factorial(a + b + 2)
                assert rule.weights @ (xi ** a * eta ** b) == pytest.approx(exact, rel=1e-13)


def test_constant_and_x_over_unit_square():
    m = single_cell([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert quadrature.integrate_cell(m, 0, lambda x, y: np.ones_like(x)) == pytest.approx(1.0)
    assert quadrature.integrate_cell(m, 0, lambda x, y: x) == pytest.approx(0.5)


def test_monomials_on_random_polygons():
    rng = np.random.default_rng(0)
    n_concave = 0
    for _ in range(20):
        pts = random_star_polygon(rng, int(rng.integers(4, 10)))
        n_concave += not geo.is_convex(pts)
        m = single_cell(pts)
        for a in range(5):
            for b in range(5 - a):
                got = quadrature.integrate_cell(m, 0, lambda x, y: x ** a * y ** b, degree=4)
                ref = monomial_oracle(pts, a, b)
                assert abs(got - ref) <= 1e-12 * abs(ref)
    assert n_concave > 0


def test_x2y2_over_l_hexagon_matches_sympy():
    x, y = sympy.symbols("x y")
    ref = (sympy.integrate(x ** 2 * y ** 2, (x, 0, 2), (y, 0, 1))
           + sympy.integrate(x ** 2 * y ** 2, (x, 0, 1), (y, 1, 2)))
    m = single_cell([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
    got = quadrature.integrate_cell(m, 0, lambda x, y: x ** 2 * y ** 2)
    assert got == pytest.approx(float(ref), rel=1e-13)


def test_triangulation_covers_every_family():
    for fam in ("t3", "t5", "t6"):
        m = generate(fam, 4, seed=0)
        _, w, cell = quadrature.quadrature_points(m, 4)
        np.testing.assert_allclose(np.bincount(cell, weights=w), m.areas, rtol=1e-12)


# --- error norms ------------------------------------------------------------

def test_grad_error_zero_for_linear_interpolant():
    m = generate("t6", 6, seed=0)
    lin = bench.linear_case()
    assert norms.grad_error_projected(m, lin.grad, vem.interpolate(lin.u, m)) <= 1e-12


def test_recovered_error_zero_for_exact_constant_field():
    m = generate("t4", 5, seed=0)
    rec = RecoveredField(np.full(m.n_vertices, 2.0), np.full(m.n_vertices, -3.0))
    assert norms.recovered_error(m, bench.linear_case().grad, rec) <= 1e-12


def test_grad_error_against_high_degree_quadrature():
    case = bench.case1()
    sol = bench.solve(generate("t3", 4), case)
    e4 = norms.grad_error_projected(sol.mesh, case.grad, sol.u)
    e10 = norms.grad_error_projected(sol.mesh, case.grad, sol.u, degree=10)
    assert e4 == pytest.approx(e10, rel=1e-4)


def test_norm_triangle_inequality():
    m = generate("t5", 6)
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(2, 2, m.n_vertices))
    na = norms.l2_norm_projected(m, *a)
    nb = norms.l2_norm_projected(m, *b)
    nab = norms.l2_norm_projected(m, *(a + b))
    assert 0 <= nab <= na + nb + 1e-14
    assert norms.l2_norm_projected(m, np.zeros(m.n_vertices), np.zeros(m.n_vertices)) == 0


def test_supercloseness_examples():
    m = generate("t2", 4)
    A = vem.stiffness_matrix(m)
    u = np.random.default_rng(2).normal(size=m.n_vertices)
    assert norms.supercloseness(A, u, u) == 0.0
    assert norms.supercloseness(A, u + 3.0, u) <= 1e-6
    with pytest.raises(ValueError):
        norms.supercloseness(-A, u, np.zeros_like(u))


def test_quadrature_reexports():
    assert norms.triangle_rule is quadrature.triangle_rule
    assert isinstance(norms.triangle_rule(4), norms.QuadratureRule)


def test_recovered_error_smaller_on_t3():
    case = bench.case1()
    sol = bench.solve(generate("t3", 16), case)
    rec = recovery.recover_field(sol.mesh, sol.u)
    assert (norms.recovered_error(sol.mesh, case.grad, rec)
            < norms.grad_error_projected(sol.mesh, case.grad, sol.u))
