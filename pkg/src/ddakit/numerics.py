"""Small dense symmetric linear algebra: Jacobi eigensolver, SPD solves, traces.

Matrices are plain 2-D float64 numpy arrays. The dimensions handled here are
tiny (scatter matrices of at most a few dozen rows), so clarity wins over
blocking or vectorised sweeps.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NoConvergence, NonSymmetric, NotPositiveDefinite

SYM_TOL = 1e-9


@dataclass(frozen=True)
class EigPairs:
    values: np.ndarray  # descending
    vectors: np.ndarray  # column i pairs with values[i]


def as_mat(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _check_square(a):
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")


def trace(a) -> float:
    a = as_mat(a)
    _check_square(a)
    return float(np.sum(np.diag(a)))


def sym_eig(a, tol: float = 1e-14, max_sweeps: int = 100) -> EigPairs:
    """Eigen-decompose a symmetric matrix with cyclic Jacobi rotations.

    Sweeps every off-diagonal pair in row order until the off-diagonal
    Frobenius norm drops below ``tol * ||a||_F``. Raises NonSymmetric when
    ``a`` is not symmetric to within 1e-9 relative, and NoConvergence when
    ``max_sweeps`` is exhausted.
    """
    a = as_mat(a)
    _check_square(a)
    n = a.shape[0]
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > SYM_TOL * max(scale, 1.0):
        raise NonSymmetric("matrix is not symmetric within tolerance")

    v = np.eye(n)
    if scale == 0.0 or n < 2:
        return _sorted(np.diag(a).copy(), v)
    # work on a unit-scaled copy so tiny or huge entries neither under- nor overflow
    a = 0.5 * (a + a.T) / scale
    norm = np.linalg.norm(a)

    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * norm:
            return _sorted(np.diag(a) * scale, v)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                diff = a[q, q] - a[p, p]
                if abs(apq) <= 1e-18 * norm:
                    a[p, q] = a[q, p] = 0.0
                    continue
                if abs(apq) < 1e-150 * abs(diff):
                    # theta would overflow; small-angle limit
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")


def _sorted(values, vectors):
    order = np.argsort(-values, kind="stable")
    return EigPairs(values=values[order], vectors=vectors[:, order])


def cholesky(a) -> np.ndarray:
    """Lower Cholesky factor; NotPositiveDefinite on a non-positive pivot."""
    a = as_mat(a)
    _check_square(a)
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc


def solve_spd(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` for symmetric positive definite ``a``.

    ``b`` may be a vector or a matrix; the result has the same shape.
    """
    lower = cholesky(a)
    b = np.asarray(b, dtype=np.float64)
    z = solve_triangular(lower, b, lower=True)
    return solve_triangular(lower.T, z, lower=False)


def inv_sqrt_spd(a) -> np.ndarray:
    """Symmetric inverse square root of an SPD matrix via ``sym_eig``."""
    pairs = sym_eig(a)
    if pairs.values.size and pairs.values[-1] <= 0.0:
        raise NotPositiveDefinite("matrix is not positive definite")
    vecs = pairs.vectors
    return (vecs / np.sqrt(pairs.values)) @ vecs.T
