"""Adaptive refinement along an interior layer.

The solution of the fourth benchmark jumps steeply across the line
y = (x + 1)/4. Starting from the perturbed hexagonal mesh, the indicator
should put nearly all new cells into a thin band around that line.
"""
from pathlib import Path

import numpy as np

from vemppr import bench
from vemppr.mesh import generate

res = bench.adaptive_study(bench.case4(), generate("t5", 8), theta=0.4, max_iters=25,
                           out_dir=Path("demo_out"), svg_every=12, name="layer")


def meets_band(pts, w=0.05):
    s = (pts[:, 0] - 4 * pts[:, 1] + 1) / np.sqrt(17)
    return s.min() <= w and s.max() >= -w


for k, cells in enumerate(res.created):
    if k % 4 == 0 or k == len(res.created) - 1:
        frac = np.mean([meets_band(c) for c in cells])
        r = res.rows[k + 1]
        print(f"refinement {k:2d}: {len(cells):4d} new cells, {frac:6.1%} in band, "
              f"dof {r['dof']:5d}, kappa {r['kappa']:.3f}")
