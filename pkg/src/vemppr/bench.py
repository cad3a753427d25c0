"""Benchmark problems and the convergence / adaptive study drivers."""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import estimator, norms, recovery, vem
from .mesh import generate, refine, write_svg
from .solver import SolverConfig, SolverError, cg_solve

LEVELS = (4, 8, 16, 32, 64)
CONVERGENCE_COLUMNS = ("level", "dof", "h", "h1_error", "supercloseness", "recovered_error",
                       "rate_h1", "rate_supercloseness", "rate_recovered")
ADAPTIVE_COLUMNS = ("iter", "dof", "eta", "h1_error", "recovered_error", "kappa")


@dataclass(frozen=True)
class TestCase:
    name: str
    domain: str
    u: object
    grad: object
    f: object
    g: object

    __test__ = False  # not a pytest class

    def check_source(self, n=100, seed=0, step=2e-5, rtol=1e-4):
        """Spot check ``-lap u = f`` with a five-point stencil at random points."""
        pts = _sample_points(self.domain, n, seed, margin=max(0.1, 10 * step))
        x, y = pts[:, 0], pts[:, 1]
        lap = (self.u(x + step, y) + self.u(x - step, y) + self.u(x, y + step)
               + self.u(x, y - step) - 4 * self.u(x, y)) / step ** 2
        f = np.asarray(self.f(x, y), dtype=float)
        err = np.abs(-lap - f)
        scale = np.maximum(1.0, np.abs(f))
        if np.any(err > rtol * scale):
            i = int(np.argmax(err / scale))
            raise ValueError(f"{self.name}: -lap u != f at {pts[i]} "
                             f"(residual {err[i]:.3e})")
        return float((err / scale).max())


def _sample_points(domain, n, seed, margin):
    rng = np.random.default_rng(seed)
    if domain == "unit_square":
        return rng.uniform(margin, 1 - margin, size=(n, 2))
    out = []
    while len(out) < n:
        p = rng.uniform(-1 + margin, 1 - margin, size=2)
        # stay away from the removed quadrant and from the corner singularity
        if (p[0] < -margin or p[1] > margin) and np.hypot(*p) > margin:
            out.append(p)
    return np.array(out)


def _checked(case):
    case.check_source()
    return case


def case1():
    pi = np.pi

    def u(x, y):
        return np.sin(pi * x) * np.sin(pi * y)

    def grad(x, y):
        return (pi * np.cos(pi * x) * np.sin(pi * y), pi * np.sin(pi * x) * np.cos(pi * y))

    def f(x, y):
        return 2 * pi ** 2 * np.sin(pi * x) * np.sin(pi * y)

    return _checked(TestCase("case1", "unit_square", u, grad, f, u))


def _polar(x, y):
    r = np.hypot(x, y)
    t = np.arctan2(y, x)
    t = np.where(t < 0, t + 2 * np.pi, t)
    return r, t


def case2():
    def u(x, y):
        r, t = _polar(np.asarray(x, float), np.asarray(y, float))
        return r ** (2 / 3) * np.sin(2 * t / 3)

    def grad(x, y):
        r, t = _polar(np.asarray(x, float), np.asarray(y, float))
        with np.errstate(divide="ignore", invalid="ignore"):
            c = (2 / 3) * r ** (-1 / 3)
        return (-c * np.sin(t / 3), c * np.cos(t / 3))

    def f(x, y):
        return np.zeros(np.broadcast(x, y).shape)

    return _checked(TestCase("case2", "lshape", u, grad, f, u))


SIGMA2 = 1e-3
MU1, MU2 = 0.25, 0.75


def case3():
    s2 = SIGMA2
    amp = 1.0 / (2 * np.pi * np.sqrt(s2))

    def bumps(x, y):
        out = []
        for m in (MU1, MU2):
            r2 = (x - m) ** 2 + (y - m) ** 2
            out.append((m, np.exp(-0.5 * r2 / s2), r2))
        return out

    def u(x, y):
        return amp * sum(e for _, e, _ in bumps(x, y))

    def grad(x, y):
        gx = gy = 0.0
        for m, e, _ in bumps(x, y):
            gx = gx - amp * e * (x - m) / s2
            gy = gy - amp * e * (y - m) / s2
        return gx, gy

    def f(x, y):
        return -amp * sum(e * (r2 / s2 ** 2 - 2 / s2) for _, e, r2 in bumps(x, y))

    return _checked(TestCase("case3", "unit_square", u, grad, f, u))


def case4():
    def parts(x, y):
        p = 16 * x * (1 - x) * y * (1 - y)
        px = 16 * (1 - 2 * x) * y * (1 - y)
        py = 16 * x * (1 - x) * (1 - 2 * y)
        s = 25 * x - 100 * y + 25
        return p, px, py, s

    def u(x, y):
        p, _, _, s = parts(x, y)
        return p * np.arctan(s)

    def grad(x, y):
        p, px, py, s = parts(x, y)
        a, d = np.arctan(s), 1.0 / (1.0 + s * s)
        return px * a + p * 25 * d, py * a - p * 100 * d

    def f(x, y):
        p, px, py, s = parts(x, y)
        a, d = np.arctan(s), 1.0 / (1.0 + s * s)
        lap_p = -32 * (y * (1 - y) + x * (1 - x))
        lap_a = -2 * s * d * d * (25 ** 2 + 100 ** 2)
        return -(lap_p * a + 2 * (px * 25 - py * 100) * d + p * lap_a)

    return _checked(TestCase("case4", "unit_square", u, grad, f, u))


def linear_case():
    """Exact linear solution with ``f = 0``; the discrete solution reproduces it."""
    def u(x, y):
        return 1.0 + 2.0 * x - 3.0 * y

    def grad(x, y):
        shape = np.broadcast(x, y).shape
        return np.full(shape, 2.0), np.full(shape, -3.0)

    def f(x, y):
        return np.zeros(np.broadcast(x, y).shape)

    return _checked(TestCase("linear", "unit_square", u, grad, f, u))


CASES = {"1": case1, "2": case2, "3": case3, "4": case4, "linear": linear_case}

# initial meshes for the adaptive runs: (family, n)
ADAPTIVE_START = {"case1": ("t1", 4), "case2": ("lshape", 4), "case3": ("t6", 8),
                  "case4": ("t5", 8), "linear": ("t1", 4)}


def get_case(name):
    key = str(name).lower().removeprefix("case")
    if key not in CASES:
        raise KeyError(f"unknown case {name!r}")
    return CASES[key]()


@dataclass
class Solution:
    mesh: object
    system: vem.SparseSystem
    u: np.ndarray
    iterations: int
    residual: float


def solve(mesh, case, cfg=SolverConfig()):
    """Assemble and solve the case on ``mesh``; Dirichlet data from ``case.g``."""
    system = vem.assemble(mesh, case.f, case.g)
    res = cg_solve(system.A, system.b, cfg)
    if not res.converged:
        raise SolverError(f"CG did not converge: residual {res.residual:.3e} after "
                          f"{res.iterations} iterations")
    return Solution(mesh, system, system.expand(res.x), res.iterations, res.residual)


def errors(sol, case):
    mesh = sol.mesh
    rec = recovery.recover_field(mesh, sol.u)
    uI = vem.interpolate(case.u, mesh)
    return {
        "h1_error": norms.grad_error_projected(mesh, case.grad, sol.u),
        "supercloseness": norms.supercloseness(sol.system.matrix, sol.u, uI),
        "recovered_error": norms.recovered_error(mesh, case.grad, rec),
        "eta": estimator.global_indicator(estimator.indicators(mesh, sol.u, rec)),
    }


def rates(dofs, values):
    """Slopes of log(value) against log(DOF) between consecutive rows."""
    d = np.log(np.asarray(dofs, dtype=float))
    v = np.log(np.asarray(values, dtype=float))
    return np.diff(v) / np.diff(d)


def fitted_slope(dofs, values):
    """Least-squares slope of log(value) versus log(DOF)."""
    return float(np.polyfit(np.log(dofs), np.log(values), 1)[0])


# asymptotic slope: fit over the finest levels only, the coarsest are pre-asymptotic
SLOPE_WINDOW = 3

# expected slope vs DOF and tolerance per (quantity, family)
RATE_TARGETS = {
    "h1_error": {f: (-0.5, 0.1) for f in ("t1", "t2", "t3", "t4", "t5", "t6")},
    "recovered_error": {f: (-1.0, 0.15) for f in ("t1", "t2", "t3", "t4", "t5", "t6")},
    "supercloseness": {"t1": (-1.0, 0.15), "t2": (-1.0, 0.15), "t5": (-1.0, 0.15),
                       "t3": (-0.5, 0.15), "t4": (-0.5, 0.15), "t6": (-0.5, 0.15)},
}


def study_slopes(rows, window=SLOPE_WINDOW):
    """Fitted slopes of the three error columns over the last ``window`` rows."""
    tail = rows[-window:]
    d = [r["dof"] for r in tail]
    return {k: fitted_slope(d, [r[k] for r in tail]) for k in RATE_TARGETS}


def check_rates(rows, family, window=SLOPE_WINDOW):
    """``(quantity, slope, target, tol, ok)`` for every targeted quantity."""
    family = str(getattr(family, "value", family))
    out = []
    for key, slope in study_slopes(rows, window).items():
        if family not in RATE_TARGETS[key]:
            continue
        target, tol = RATE_TARGETS[key][family]
        out.append((key, slope, target, tol, abs(slope - target) <= tol))
    return out


def convergence_study(case, family, levels=LEVELS, seed=0, cfg=SolverConfig()):
    rows = []
    for n in levels:
        mesh = generate(family, n, seed)
        sol = solve(mesh, case, cfg)
        e = errors(sol, case)
        rows.append({"level": n, "dof": mesh.n_vertices, "h": mesh.h,
                     "h1_error": e["h1_error"], "supercloseness": e["supercloseness"],
                     "recovered_error": e["recovered_error"]})
    for key in ("h1_error", "supercloseness", "recovered_error"):
        r = rates([row["dof"] for row in rows], [row[key] for row in rows])
        rows[0]["rate_" + key.removesuffix("_error")] = float("nan")
        for row, val in zip(rows[1:], r):
            row["rate_" + key.removesuffix("_error")] = float(val)
    return rows


@dataclass
class AdaptiveResult:
    rows: list
    mesh: object
    theta: float
    created: list = field(default_factory=list)  # per refinement: coordinates of new cells


def adaptive_study(case, initial_mesh, theta=estimator.DEFAULT_THETA, max_iters=25,
                   dof_budget=30000, out_dir=None, svg_every=5, name=None,
                   cfg=SolverConfig()):
    """Solve -> estimate -> mark -> refine until ``max_iters`` or the DOF budget.

    Iterations are solves; the loop stops before refining past the budget.
    """
    mesh = initial_mesh
    rows, created = [], []
    name = name or f"adaptive_{case.name}"
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    for it in range(max_iters):
        sol = solve(mesh, case, cfg)
        rec = recovery.recover_field(mesh, sol.u)
        eta = estimator.indicators(mesh, sol.u, rec)
        eta_g = estimator.global_indicator(eta)
        row = {"iter": it, "dof": mesh.n_vertices, "eta": eta_g}
        if case.grad is not None:
            h1 = norms.grad_error_projected(mesh, case.grad, sol.u)
            row["h1_error"] = h1
            row["recovered_error"] = norms.recovered_error(mesh, case.grad, rec)
            row["kappa"] = eta_g / h1 if h1 > 0 else float("nan")
        rows.append(row)
        if out is not None and (it % svg_every == 0):
            write_svg(mesh, out / f"{name}_{it}.svg", values=eta, log_scale=True)
        if it == max_iters - 1 or mesh.n_vertices >= dof_budget:
            break
        marked = estimator.dorfler_mark(eta, theta)
        new_mesh = refine(mesh, marked)
        is_new = np.isin(new_mesh.parents, marked)
        created.append([new_mesh.cell_points(c) for c in np.flatnonzero(is_new)])
        mesh = new_mesh
    if out is not None:
        if rows[-1]["iter"] % svg_every:
            write_svg(mesh, out / f"{name}_{rows[-1]['iter']}.svg", values=eta, log_scale=True)
        write_csv(rows, out / f"{name}.csv", ADAPTIVE_COLUMNS)
    return AdaptiveResult(rows, mesh, theta, created)


def write_csv(rows, path, columns):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c, "")) for c in columns])
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v
