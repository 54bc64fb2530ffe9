from typing import Tuple

import numpy as np
import numpy.typing as npt
from scipy import linalg as sla

from ..core.errors import ConvergenceError, DimensionError, NonHermitianError, SingularMatrixError

ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]

HERMITIAN_TOL = 1e-10
EIGEN_TOL = 1e-8
MAX_POWER_ITERATIONS = 10_000
MAX_CONDITION = 1e12


def as_complex_matrix(a) -> ComplexMatrix:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def fix_phase(v: ComplexVector) -> ComplexVector:
    """Rotate ``v`` so that its largest-magnitude entry is real and positive."""
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return v
    return v * (np.conj(v[k]) / abs(v[k]))


def principal_eigenvector(
    a,
    tol: float = EIGEN_TOL,
    max_iter: int = MAX_POWER_ITERATIONS,
) -> Tuple[ComplexVector, float]:
    """Dominant eigenpair of a Hermitian PSD matrix by power iteration.

    Stops once ||A v - lambda v|| <= tol * lambda. The matrix is rescaled by its
    largest entry first so that tiny path-loss magnitudes do not underflow the
    test; lambda is reported in the original scale.
    """
    m = as_complex_matrix(a)
    n, k = m.shape
    if n != k:
        raise DimensionError(f"expected a square matrix, got {m.shape}")
    scale = float(np.max(np.abs(m)))
    if scale == 0.0:
        v = np.zeros(n, dtype=np.complex128)
        v[0] = 1.0
        return v, 0.0
    m = m / scale
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise NonHermitianError("matrix is not Hermitian within tolerance")
    m = 0.5 * (m + m.conj().T)
    if n == 1:
        return np.ones(1, dtype=np.complex128), float(m[0, 0].real) * scale

    # deterministic start: strongest column, nudged off any exact invariant subspace
    col = int(np.argmax(np.linalg.norm(m, axis=0)))
    v = m[:, col] + 1e-3 * np.ones(n) / np.sqrt(n)
    v = v / np.linalg.norm(v)
    lam = 0.0
    residual = np.inf
    for it in range(1, max_iter + 1):
        mv = m @ v
        lam = float(np.real(np.vdot(v, mv)))
        residual = float(np.linalg.norm(mv - lam * v))
        if residual <= tol * max(lam, 0.0) or residual == 0.0:
            return fix_phase(v), lam * scale
        norm = np.linalg.norm(mv)
        if norm == 0.0:
            # v fell into the null space; the matrix is nonzero so another column works
            v = np.roll(v, 1)
            continue
        v = mv / norm
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations",
        iterations=max_iter,
        residual=residual,
    )


def left_pseudo_inverse(v) -> ComplexMatrix:
    """U = (V^H V)^{-1} V^H for a tall full-column-rank V.

    Computed from the economic QR factorization V = Q R as R^{-1} Q^H, so the
    normal equations are never formed explicitly.
    """
    m = as_complex_matrix(v)
    rows, cols = m.shape
    if rows < cols:
        raise DimensionError(f"left pseudo-inverse needs rows >= cols, got {m.shape}")
    q, r = sla.qr(m, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.min() == 0.0:
        raise SingularMatrixError("matrix is rank deficient", condition=float("inf"))
    cond = float(np.linalg.cond(r))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMatrixError(f"matrix is rank deficient (condition estimate {cond:.3e})", condition=cond)
    return sla.solve_triangular(r, q.conj().T, lower=False)
