import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vemppr import bench, estimator, recovery, vem
from vemppr.mesh import generate
from vemppr.recovery import RecoveredField


def brute_force_min(eta, theta):
    """Smallest cardinality of any subset meeting the bulk criterion."""
    sq = np.asarray(eta, float) ** 2
    n = len(sq)
    if sq.sum() == 0:
        return 0
    masks = (np.arange(2 ** n)[:, None] >> np.arange(n)) & 1
    sums = masks @ sq
    total = np.sort(sq)[::-1].cumsum()[-1]  # same summation order as the marker
    ok = estimator.bulk_criterion(sums, total, theta)
    return int(masks[ok].sum(axis=1).min())


# --- indicators -------------------------------------------------------------

def test_indicator_vanishes_when_recovery_equals_discrete_gradient():
    m = generate("t6", 5, seed=0)
    u = 2.0 * m.vertices[:, 0] - 0.5 * m.vertices[:, 1]
    rec = RecoveredField(np.full(m.n_vertices, 2.0), np.full(m.n_vertices, -0.5))
    assert np.abs(estimator.indicators(m, u, rec)).max() <= 1e-12


def test_indicator_with_constant_recovered_field():
    m = generate("t3", 3)
    rng = np.random.default_rng(0)
    u = rng.normal(size=m.n_vertices)
    c = np.array([0.7, -1.3])
    rec = RecoveredField(np.full(m.n_vertices, c[0]), np.full(m.n_vertices, c[1]))
    eta = estimator.indicators(m, u, rec)
    g = vem.project(m, u)[:, 1:]
    np.testing.assert_allclose(eta, np.sqrt(m.areas) * np.linalg.norm(c - g, axis=1),
                               rtol=1e-12)


def test_vectorised_indicators_match_per_cell_high_degree():
    case = bench.case1()
    sol = bench.solve(generate("t1", 8), case)
    rec = recovery.recover_field(sol.mesh, sol.u)
    eta = estimator.indicators(sol.mesh, sol.u, rec)
    brute = [estimator.local_indicator(sol.mesh, c, sol.u, rec, degree=10)
             for c in range(sol.mesh.n_cells)]
    assert np.sum(eta ** 2) == pytest.approx(np.sum(np.square(brute)), rel=1e-8)
    el = vem.local_elements(sol.mesh)[5]
    assert estimator.local_indicator(sol.mesh, el, sol.u, rec) == pytest.approx(eta[5])


def test_global_indicator():
    eta = np.array([3.0, 4.0])
    assert estimator.global_indicator(eta) == pytest.approx(5.0)


@settings(max_examples=50)
@given(st.lists(st.floats(0, 10), min_size=1, max_size=30), st.randoms(use_true_random=False))
def test_global_indicator_invariant_under_reordering(eta, rnd):
    perm = list(eta)
    rnd.shuffle(perm)
    a, b = estimator.global_indicator(eta), estimator.global_indicator(perm)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_estimate_bundle():
    case = bench.case1()
    sol = bench.solve(generate("t2", 4), case)
    rec = recovery.recover_field(sol.mesh, sol.u)
    s = estimator.estimate(sol.mesh, sol.u, rec, theta=0.5)
    assert s.eta_global ** 2 == pytest.approx(np.sum(s.eta ** 2), rel=1e-12)
    sel = np.sum(s.eta[s.marked] ** 2)
    assert np.sqrt(sel) >= 0.5 * s.eta_global * (1 - 1e-14)
    # one cell fewer can never be enough: the best k - 1 cells fall short
    k = len(s.marked)
    assert np.sum(np.sort(s.eta)[::-1][:k - 1] ** 2) < 0.25 * s.eta_global ** 2


# --- effectivity ------------------------------------------------------------

def test_effectivity_undefined_for_exact_solution():
    m = generate("t1", 4)
    lin = bench.linear_case()
    sol = bench.solve(m, lin)
    rec = recovery.recover_field(m, sol.u)
    with pytest.raises(estimator.EstimatorError):
        estimator.effectivity(m, lin.grad, sol.u, rec)


def test_effectivity_is_one_when_recovery_is_exact_gradient():
    # exact u quadratic: its gradient is linear, so the projected vertex values of
    # grad u are grad u itself and numerator and denominator coincide
    m = generate("t5", 4)
    q = lambda x, y: x * x - x * y + 0.5 * y * y  # noqa: E731
    grad = lambda x, y: (2 * x - y, -x + y)  # noqa: E731
    u = vem.interpolate(q, m) + 0.01 * np.random.default_rng(1).normal(size=m.n_vertices)
    gx, gy = grad(m.vertices[:, 0], m.vertices[:, 1])
    assert estimator.effectivity(m, grad, u, RecoveredField(gx, gy)) == pytest.approx(1.0,
                                                                                       abs=1e-12)


# --- marking ----------------------------------------------------------------

def test_mark_single_dominant():
    assert estimator.dorfler_mark([0.8, 0.6, 0.0], 0.8) == [0]


def test_mark_theta_one_takes_all_nonzero():
    assert estimator.dorfler_mark([0.1, 0.0, 0.3, 0.2], 1.0) == [0, 2, 3]


@pytest.mark.parametrize("c", [0.3, 1.0, 7.7, 1e-5])
def test_mark_equal_indicators(c):
    assert len(estimator.dorfler_mark([c] * 4, 0.5)) == 1


def test_mark_ties_by_id():
    assert estimator.dorfler_mark([1.0, 2.0, 2.0, 2.0], 0.3) == [1]


def test_mark_all_zero():
    assert estimator.dorfler_mark([0.0, 0.0], 0.5) == []


@pytest.mark.parametrize("theta", [0.0, 1.5, -0.1])
def test_mark_rejects_bad_theta(theta):
    with pytest.raises(ValueError):
        estimator.dorfler_mark([1.0], theta)


@settings(max_examples=150)
@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=12), st.floats(0.01, 1.0))
def test_mark_is_minimal(eta, theta):
    marked = estimator.dorfler_mark(eta, theta)
    assert len(marked) == brute_force_min(eta, theta)


@settings(max_examples=100)
@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=20), st.floats(0.01, 1.0),
       st.floats(0.01, 1.0))
def test_mark_is_monotone_in_theta(eta, t1, t2):
    lo, hi = sorted((t1, t2))
    assert set(estimator.dorfler_mark(eta, lo)) <= set(estimator.dorfler_mark(eta, hi))


def test_mark_against_all_subsets_small():
    # explicit combinatorial enumeration, independent of the bitmask helper
    rng = np.random.default_rng(3)
    for _ in range(30):
        eta = rng.uniform(size=6)
        theta = rng.uniform(0.05, 1)
        total = np.sum(eta ** 2)
        best = min(len(s) for k in range(1, 7) for s in itertools.combinations(range(6), k)
                   if np.sqrt(np.sum(eta[list(s)] ** 2)) >= theta * np.sqrt(total))
        assert len(estimator.dorfler_mark(eta, theta)) == best
