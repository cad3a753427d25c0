"""Polygon meshes: the six unit-square families and the L-shape.

Writes one SVG per family into ./demo_out and prints basic statistics.
Refines a single cell afterwards to show how hanging nodes appear in the
neighbours as extra collinear vertices.
"""
from pathlib import Path

import numpy as np

from vemppr.mesh import MeshFamily, generate, refine, write_svg

out = Path("demo_out")
out.mkdir(exist_ok=True)

print(f"{'family':8s} {'cells':>6s} {'verts':>6s} {'h':>8s} {'max nv':>7s}")
for fam in MeshFamily:
    m = generate(fam, 8, seed=0)
    nv = max(len(c) for c in m.cells)
    print(f"{fam.value:8s} {m.n_cells:6d} {m.n_vertices:6d} {m.h:8.4f} {nv:7d}")
    write_svg(m, out / f"mesh_{fam.value}.svg")

# %% refine one Voronoi cell, its neighbours pick up hanging nodes
m = generate("t6", 6, seed=1)
centre = int(np.argmin(np.linalg.norm(m.centroids - 0.5, axis=1)))
r = refine(m, [centre])
print(f"\nrefining cell {centre} of t6(6): {m.n_cells} -> {r.n_cells} cells, "
      f"{m.n_vertices} -> {r.n_vertices} vertices")
grew = [c for c in range(r.n_cells) if r.parents[c] != centre
        and len(r.cells[c]) > len(m.cells[r.parents[c]])]
print(f"{len(grew)} neighbours gained collinear vertices; area still {r.total_area:.15f}")
write_svg(r, out / "refined_t6.svg")
