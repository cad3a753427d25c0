"""Lowest-order virtual elements on polygonal meshes with gradient recovery.

Subpackages and modules:

* ``mesh``       polygon meshes, generators, refinement, IO
* ``vem``        projections, stiffness and load assembly
* ``solver``     preconditioned conjugate gradients
* ``recovery``   least-squares quadratic gradient recovery at vertices
* ``estimator``  recovery-based indicators and bulk marking
* ``norms``      error norms through the element projections
* ``bench``      test problems, convergence and adaptive studies
* ``cli``        command-line driver
"""

from . import bench, estimator, mesh, norms, quadrature, recovery, solver, vem
from .mesh import MeshFamily, PolygonMesh, generate, refine
from .recovery import recover_field
from .solver import SolverConfig, cg_solve

__version__ = "0.1.0"

__all__ = [
    "bench", "estimator", "mesh", "norms", "quadrature", "recovery", "solver", "vem",
    "MeshFamily", "PolygonMesh", "generate", "refine", "recover_field",
    "SolverConfig", "cg_solve", "__version__",
]
