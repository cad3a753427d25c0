"""Uniform convergence on the six families for the smooth sine solution.

Prints, per family, the error in the discrete gradient, the recovered
gradient and the supercloseness quantity at every level, then the fitted
rates versus DOF. Rates of -0.5 correspond to first order in h, -1.0 to
second order.
"""
from vemppr import bench
from vemppr.mesh import UNIT_SQUARE_FAMILIES

levels = (4, 8, 16, 32)
case = bench.case1()

for fam in UNIT_SQUARE_FAMILIES:
    rows = bench.convergence_study(case, fam, levels)
    print(f"\n{fam.value}")
    print(f"{'n':>4s} {'dof':>6s} {'|grad e|':>10s} {'|G_h e|':>10s} {'superclose':>11s}")
    for r in rows:
        print(f"{r['level']:4d} {r['dof']:6d} {r['h1_error']:10.3e} "
              f"{r['recovered_error']:10.3e} {r['supercloseness']:11.3e}")
    s = bench.study_slopes(rows)
    print("fitted slopes (finest 3): " + ", ".join(f"{k} {v:+.2f}" for k, v in s.items()))

# the hexagonal, chevron and Voronoi families show how supercloseness
# depends on mesh symmetry while the recovered gradient stays second order
