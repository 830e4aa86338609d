"""Dense linear-algebra primitives: thin SVD, QR, power iteration.

Matrices are plain 2-D ``numpy`` arrays (float64 unless an extended
precision path is requested explicitly).
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError, InputError, RankError
from .rng import make_rng, standard_normal

# singular values below ZERO_FLOOR * sigma_1 count as zero
ZERO_FLOOR = 1e-15
# pivoted QR stops when every trailing column norm is below this * ||M||_F
RANK_TOL = 1e-14
QR_PIVOT_TOL = 1e-12


def as_matrix(M, name="matrix", dtype=np.float64):
    """Validate and return ``M`` as a finite 2-D array of ``dtype``."""
    arr = np.asarray(M, dtype=dtype)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class ThinSVD:
    """Rank-``k`` truncated SVD, ``M ~= U @ diag(sigma) @ V.T``."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        return self.sigma.shape[0]

    def reconstruct(self):
        return (self.U * self.sigma) @ self.V.T


@dataclass(frozen=True)
class SpectralSummary:
    sigma_max: float
    sigma_min: float
    kappa: float
    # True when sigma_min fell under the zero floor and kappa is +inf
    rank_deficient: bool = False


def thin_svd(M, k, dtype=np.float64):
    """Top-``k`` singular triplets of ``M``.

    Column-pivoted Householder QR reduces ``M`` (or its transpose, whichever
    is tall) to a ``rho x n`` trapezoid where ``rho`` is the numerical rank,
    then one-sided Jacobi diagonalizes that small factor. If the numerical
    rank is below ``k`` the trailing singular values are reported as exact
    zeros with orthonormal completion vectors.

    Parameters
    ----------
    M : array_like, shape (rows, cols)
    k : int
        Number of triplets, ``1 <= k <= min(rows, cols)``.
    dtype : numpy dtype, optional
        Working precision. ``np.longdouble`` routes through the numpy kernels.

    Returns
    -------
    ThinSVD
        Singular values non-increasing; ``U`` and ``V`` orthonormal.
    """
    M = as_matrix(M, dtype=dtype)
    rows, cols = M.shape
    k = int(k)
    if not 1 <= k <= min(rows, cols):
        raise DimensionError(f"rank request {k} outside [1, {min(rows, cols)}]")

    transposed = rows < cols
    X = M.T if transposed else M
    p, q = X.shape
    fro = np.sqrt(np.sum(X * X))
    if fro == 0:
        left = np.eye(p, k, dtype=dtype)
        right = np.eye(q, k, dtype=dtype)
        sigma = np.zeros(k, dtype=dtype)
    else:
        Q, R, perm, rho = kernels.householder_qr(
            X, pivot=True, tol=RANK_TOL * float(fro), q=max(k, 1))
        # X[:, perm] = Q R  =>  X = Q (R P^T); SVD of the small factor's transpose
        Y = np.zeros((q, rho), dtype=dtype)
        Y[perm, :] = R.T
        Yrot, Vj, _ = kernels.jacobi_orthogonalize(Y)
        s = np.sqrt(np.einsum("ij,ij->j", Yrot, Yrot))
        order = np.argsort(-s, kind="stable")
        s, Yrot, Vj = s[order], Yrot[:, order], Vj[:, order]
        keep = min(k, rho)
        nz = s[:keep] > 0
        keep = int(np.count_nonzero(nz))
        left = np.empty((p, k), dtype=dtype)
        right = np.empty((q, k), dtype=dtype)
        left[:, :keep] = Q[:, :rho] @ Vj[:, :keep]
        right[:, :keep] = Yrot[:, :keep] / s[:keep]
        sigma = np.zeros(k, dtype=dtype)
        sigma[:keep] = s[:keep]
        if keep < k:
            left[:, keep:] = _complete(left[:, :keep], k - keep)
            right[:, keep:] = _complete(right[:, :keep], k - keep)
    if transposed:
        return ThinSVD(U=right, sigma=sigma, V=left)
    return ThinSVD(U=left, sigma=sigma, V=right)


def _complete(B, extra):
    """``extra`` orthonormal columns orthogonal to the orthonormal ``B``."""
    basis = [B[:, j] for j in range(B.shape[1])]
    added = []
    for e in np.eye(B.shape[0], dtype=B.dtype):
        v = e
        for _ in range(2):
            for b in basis:
                v = v - (b @ v) * b
        nv = np.sqrt(v @ v)
        if nv > 0.5:
            v = v / nv
            basis.append(v)
            added.append(v)
            if len(added) == extra:
                break
    return np.stack(added, axis=1)


def qr_orthonormalize(G):
    """Orthonormal basis for ``range(G)`` by Householder QR.

    Columns are signed so that ``R`` has a non-negative diagonal, which makes
    the result unique. Raises :class:`RankError` when a diagonal entry of
    ``R`` falls below ``1e-12 * ||G||_F``.
    """
    G = as_matrix(G, "G")
    rows, cols = G.shape
    if rows < cols:
        raise DimensionError(f"need rows >= cols, got {G.shape}")
    Q, R, _, _ = kernels.householder_qr(G, pivot=False)
    diag = np.diag(R)
    floor = QR_PIVOT_TOL * np.linalg.norm(G)
    bad = np.flatnonzero(np.abs(diag) <= floor)
    if bad.size:
        raise RankError(f"G is numerically rank deficient at column {bad[0]}")
    return Q * np.sign(diag)


def power_iteration_lambda_max(M, iters=200, seed=0):
    """Estimate ``lambda_max(M.T @ M)`` by power iteration.

    The operator is applied implicitly as ``x -> M.T @ (M @ x)``. The
    returned value is the Rayleigh quotient of the last iterate before the
    final multiply; for a positive semidefinite operator this is
    non-decreasing in ``iters`` and never exceeds ``lambda_max``.
    """
    M = as_matrix(M)
    if iters < 1:
        raise InputError(f"iters must be >= 1, got {iters}")
    if not np.any(M):
        raise InputError("power iteration on a zero matrix")
    x = standard_normal(make_rng(seed), M.shape[1])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(int(iters)):
        z = M.T @ (M @ x)
        lam = float(x @ z) / float(x @ x)
        nz = np.linalg.norm(z)
        if nz == 0:
            # start vector in the null space; no information to iterate on
            raise InputError("power iteration collapsed to the null space")
        x = z / nz
    return lam


def spectral_summary(M, r):
    """Largest and ``r``-th singular value of ``M`` and their ratio."""
    svd = thin_svd(M, r)
    smax = float(svd.sigma[0])
    smin = float(svd.sigma[r - 1])
    if smax == 0 or smin <= ZERO_FLOOR * smax:
        return SpectralSummary(smax, smin, float("inf"), rank_deficient=True)
    return SpectralSummary(smax, smin, smax / smin)
