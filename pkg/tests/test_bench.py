import csv

import numpy as np
import pytest

from vemppr import bench
from vemppr.mesh import generate


def fd_laplacian(u, x, y, h=1e-4):
    return (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4 * u(x, y)) / h ** 2


# --- cases ------------------------------------------------------------------

def test_case1_values():
    c = bench.case1()
    assert c.u(0.5, 0.5) == pytest.approx(1.0)
    assert c.f(0.5, 0.5) == pytest.approx(2 * np.pi ** 2)
    assert np.allclose(c.grad(0.5, 0.5), (0.0, 0.0), atol=1e-15)
    assert c.domain == "unit_square"


def test_case2_values():
    c = bench.case2()
    assert c.u(0.0, 1.0) == pytest.approx(np.sqrt(3) / 2)
    assert c.u(0.0, 0.0) == 0.0
    assert abs(fd_laplacian(c.u, 0.5, 0.5)) <= 1e-6
    # u vanishes on both edges of the re-entrant corner (theta = 0 and 3 pi / 2)
    assert c.u(0.5, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert c.u(0.0, -0.5) == pytest.approx(0.0, abs=1e-15)
    assert c.u(-0.5, 0.0) == pytest.approx(0.5 ** (2 / 3) * np.sqrt(3) / 2)
    assert c.domain == "lshape"


def test_case2_gradient_matches_finite_differences():
    c = bench.case2()
    for x, y in [(-0.5, 0.3), (0.2, 0.7), (-0.4, -0.6)]:
        h = 1e-6
        fd = ((c.u(x + h, y) - c.u(x - h, y)) / (2 * h), (c.u(x, y + h) - c.u(x, y - h)) / (2 * h))
        np.testing.assert_allclose(c.grad(x, y), fd, rtol=1e-6)


def test_case3_values():
    c = bench.case3()
    assert bench.SIGMA2 == 1e-3
    for x, y in [(0.1, 0.6), (0.3, 0.2), (0.8, 0.75)]:
        assert c.u(x, y) == pytest.approx(c.u(y, x))
    amp = 1 / (2 * np.pi * np.sqrt(1e-3))
    peak = amp * (1 + np.exp(-0.5 * 2 * 0.5 ** 2 / 1e-3))
    assert c.u(0.25, 0.25) == pytest.approx(peak, rel=1e-14)


def test_case4_values():
    c = bench.case4()
    s = np.linspace(0, 1, 11)
    for x, y in [(s, 0 * s), (s, 0 * s + 1), (0 * s, s), (0 * s + 1, s)]:
        np.testing.assert_allclose(c.u(x, y), 0.0, atol=1e-15)
    # on the layer y = (x + 1) / 4 the argument of arctan vanishes
    assert c.u(0.5, 0.375) == pytest.approx(0.0, abs=1e-15)
    g_layer = np.hypot(*c.grad(0.5, 0.375))
    g_far = np.hypot(*c.grad(0.9, 0.9))
    assert g_layer > 20 * g_far


@pytest.mark.parametrize("name", ["1", "2", "3", "4", "linear"])
def test_cases_satisfy_the_pde(name):
    assert bench.get_case(name).check_source() < 1e-4


def test_check_source_catches_a_wrong_source():
    good = bench.case1()
    bad = bench.TestCase("bad", good.domain, good.u, good.grad, lambda x, y: 0 * x + 1.0, good.g)
    with pytest.raises(ValueError, match="lap u"):
        bad.check_source()


def test_get_case_names():
    assert bench.get_case("case3").name == "case3"
    assert bench.get_case(2).name == "case2"
    with pytest.raises(KeyError):
        bench.get_case("7")


# --- studies ----------------------------------------------------------------

def test_rates_helper():
    r = bench.rates([100, 400, 1600], [1.0, 0.5, 0.25])
    np.testing.assert_allclose(r, -0.5)
    assert bench.fitted_slope([100, 400, 1600], [1.0, 0.25, 1 / 16]) == pytest.approx(-1.0)


def test_convergence_study_t1():
    rows = bench.convergence_study(bench.case1(), "t1", (4, 8, 16, 32))
    assert [r["level"] for r in rows] == [4, 8, 16, 32]
    assert [r["dof"] for r in rows] == [25, 81, 289, 1089]
    assert np.isnan(rows[0]["rate_h1"])
    d = [r["dof"] for r in rows]
    assert abs(bench.fitted_slope(d, [r["h1_error"] for r in rows]) + 0.5) <= 0.1
    slopes = bench.study_slopes(rows)
    assert abs(slopes["supercloseness"] + 1.0) <= 0.15
    checks = bench.check_rates(rows, "t1")
    assert {c[0] for c in checks} == {"h1_error", "recovered_error", "supercloseness"}
    assert all(ok for *_, ok in checks)


@pytest.mark.parametrize("name", ["1", "3", "4"])
def test_supercloseness_below_h1_on_structured_convex_families(name):
    case = bench.get_case(name)
    for fam in ("t1", "t2", "t5"):
        sol = bench.solve(generate(fam, bench.LEVELS[-1]), case)
        e = bench.errors(sol, case)
        assert e["supercloseness"] < e["h1_error"]


def test_write_csv(tmp_path):
    rows = bench.convergence_study(bench.case1(), "t2", (4, 8))
    path = bench.write_csv(rows, tmp_path / "c.csv", bench.CONVERGENCE_COLUMNS)
    with path.open() as fh:
        data = list(csv.reader(fh))
    assert tuple(data[0]) == bench.CONVERGENCE_COLUMNS
    assert len(data) == 3
    assert float(data[2][3]) == rows[1]["h1_error"]


# --- adaptive ---------------------------------------------------------------

def test_adaptive_lshape_refines_near_the_corner(tmp_path):
    res = bench.adaptive_study(bench.case2(), generate("lshape", 4), 0.4, max_iters=8,
                               out_dir=tmp_path, svg_every=3, name="ad")
    dofs = [r["dof"] for r in res.rows]
    assert all(b > a for a, b in zip(dofs, dofs[1:]))
    new = [c for step in res.created for c in step]
    near = np.mean([np.hypot(*c.mean(axis=0)) < 0.2 for c in new])
    uniform_share = (0.75 * np.pi * 0.2 ** 2) / 3.0
    assert near > uniform_share
    assert {p.name for p in tmp_path.iterdir()} == {"ad.csv", "ad_0.svg", "ad_3.svg",
                                                    "ad_6.svg", "ad_7.svg"}
    header = (tmp_path / "ad.csv").read_text().splitlines()[0]
    assert header == ",".join(bench.ADAPTIVE_COLUMNS)


def test_adaptive_gaussians_refine_near_the_means():
    start = bench.ADAPTIVE_START["case3"]
    res = bench.adaptive_study(bench.case3(), generate(*start, seed=0), 0.4, max_iters=6)
    new = np.array([c.mean(axis=0) for step in res.created for c in step])
    d = np.minimum(np.hypot(*(new - bench.MU1).T), np.hypot(*(new - bench.MU2).T))
    assert np.mean(d < 0.15) > 2 * np.pi * 0.15 ** 2


def test_adaptive_respects_the_budget():
    res = bench.adaptive_study(bench.case2(), generate("lshape", 4), 0.4, max_iters=50,
                               dof_budget=150)
    assert res.rows[-1]["dof"] >= 150
    assert all(r["dof"] < 150 for r in res.rows[:-1])
    assert len(res.created) == len(res.rows) - 1


def test_adaptive_sharp_layer_effectivity_settles():
    fam, n = bench.ADAPTIVE_START["case4"]
    res = bench.adaptive_study(bench.case4(), generate(fam, n), 0.4)
    assert all(0.85 <= r["kappa"] <= 1.15 for r in res.rows[-3:])
