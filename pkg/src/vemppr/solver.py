import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-12
    max_iter: int = 20000
    preconditioner: str = "jacobi"

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.preconditioner not in ("none", "jacobi"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool
    history: list = field(default_factory=list, repr=False)  # preconditioned residual norms


def cg_solve(A, b, cfg=SolverConfig()):
    """Preconditioned conjugate gradients from ``x0 = 0``.

    Stops when ``||b - A x|| <= rel_tol ||b||``. Hitting ``max_iter`` is not
    an error: the result comes back with ``converged=False`` and a warning.
    """
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(b)) or not np.all(np.isfinite(A.data)):
        raise SolverError("non-finite entries in the system")
    n = len(b)
    x = np.zeros(n)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return CGResult(x, 0, 0.0, True, [0.0])
    if cfg.preconditioner == "jacobi":
        d = A.diagonal()
        if np.any(d <= 0):
            raise SolverError("Jacobi preconditioner needs a positive diagonal")
        minv = 1.0 / d
    else:
        minv = np.ones(n)
    r = b.copy()
    z = minv * r
    p = z.copy()
    rz = float(r @ z)
    history = [np.sqrt(rz)]
    tol = cfg.rel_tol * bnorm
    rnorm = bnorm
    it = 0
    while it < cfg.max_iter:
        Ap = A @ p
        pAp = float(p @ Ap)
        if not np.isfinite(pAp):
            raise SolverError("non-finite value during iteration")
        if pAp <= 0:
            raise SolverError("matrix is not positive definite")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        it += 1
        rnorm = float(np.linalg.norm(r))
        z = minv * r
        rz_new = float(r @ z)
        history.append(np.sqrt(max(rz_new, 0.0)))
        if rnorm <= tol:
            # the recursive residual drifts; confirm with the true one and restart if needed
            r = b - A @ x
            rnorm = float(np.linalg.norm(r))
            if rnorm <= tol:
                break
            z = minv * r
            rz = float(r @ z)
            p = z.copy()
            continue
        p = z + (rz_new / rz) * p
        rz = rz_new
    rnorm = float(np.linalg.norm(b - A @ x))
    converged = rnorm <= tol
    if not converged:
        warnings.warn(f"CG stopped after {it} iterations with residual {rnorm:.3e}")
    return CGResult(x, it, rnorm, converged, history)
