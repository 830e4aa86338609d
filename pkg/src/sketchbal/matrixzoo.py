"""Test-matrix families.

* ``structured``: low-coherence Gaussian-QR factors, spectrum
  ``sigma_i = 1 + 0.2 (r + 1 - i) / r``.
* ``adversarial``: left factor whose first column sits near ``e_1``,
  spectrum ``(1, ..., 1, 1e-9)``.
* ``poisson2d``: five-point Dirichlet Laplacian on a ``k x k`` grid.
* ``path_laplacian``: combinatorial Laplacian of a path graph.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.io
import scipy.sparse

from .errors import DimensionError, InputError, ParameterError
from .linalg import as_matrix, qr_orthonormalize, thin_svd
from .rng import make_rng, standard_normal

FAMILIES = ("structured", "adversarial", "poisson2d", "path_laplacian")
COHERENT_MIX = 0.1
ADVERSARIAL_FLOOR = 1e-9


@dataclass(frozen=True)
class FactoredMatrix:
    """A generated matrix with its thin SVD factors when known in closed form."""

    A: np.ndarray
    family: str
    U: Optional[np.ndarray] = None
    sigma: Optional[np.ndarray] = None
    V: Optional[np.ndarray] = None

    @property
    def shape(self):
        return self.A.shape

    def factors(self, r=None):
        """``(U, sigma, V)``; computed by :func:`thin_svd` if not stored."""
        if self.U is not None and (r is None or r == self.sigma.shape[0]):
            return self.U, self.sigma, self.V
        r = min(self.A.shape) if r is None else r
        svd = thin_svd(self.A, r)
        return svd.U, svd.sigma, svd.V


def _check_factor_dims(m, n, r):
    if r < 1 or r > min(m, n):
        raise DimensionError(f"need 1 <= r <= min(m, n), got m={m}, n={n}, r={r}")


def structured_spectrum(r):
    i = np.arange(1, r + 1)
    return 1.0 + 0.2 * (r + 1 - i) / r


def gen_structured(m, n, r, seed):
    _check_factor_dims(m, n, r)
    rng = make_rng(seed)
    U = qr_orthonormalize(standard_normal(rng, (m, r)))
    V = qr_orthonormalize(standard_normal(rng, (n, r)))
    sigma = structured_spectrum(r)
    return FactoredMatrix((U * sigma) @ V.T, "structured", U, sigma, V)


def gen_adversarial(m, n, r, seed):
    """Coherent, nearly singular family with condition number 1e9.

    The first left singular vector is ``normalize(e_1 + 0.1 g)`` for a
    random unit vector ``g``, so its first-row leverage is about 0.99.
    """
    if r < 2:
        raise ParameterError(f"adversarial family needs r >= 2, got {r}")
    _check_factor_dims(m, n, r)
    rng = make_rng(seed)
    g = standard_normal(rng, m)
    u1 = COHERENT_MIX * g / np.linalg.norm(g)
    u1[0] += 1.0
    u1 /= np.linalg.norm(u1)
    rest = standard_normal(rng, (m, r - 1))
    U = qr_orthonormalize(np.column_stack([u1, rest]))
    V = qr_orthonormalize(standard_normal(rng, (n, r)))
    sigma = np.ones(r)
    sigma[-1] = ADVERSARIAL_FLOOR
    return FactoredMatrix((U * sigma) @ V.T, "adversarial", U, sigma, V)


def gen_poisson2d(k):
    """``k^2 x k^2`` five-point stencil (4 on the diagonal, -1 to neighbours)."""
    if k < 2:
        raise ParameterError(f"grid needs k >= 2, got {k}")
    T = 2.0 * np.eye(k) - np.eye(k, k=1) - np.eye(k, k=-1)
    I = np.eye(k)
    return FactoredMatrix(np.kron(I, T) + np.kron(T, I), "poisson2d")


def gen_path_laplacian(p):
    if p < 2:
        raise ParameterError(f"path needs p >= 2 vertices, got {p}")
    L = -np.eye(p, k=1) - np.eye(p, k=-1)
    L[np.diag_indices(p)] = -L.sum(axis=1)
    return FactoredMatrix(L, "path_laplacian")


def coherence(U):
    """Largest leverage score ``max_i ||U[i, :]||^2`` of an orthonormal basis."""
    U = as_matrix(U, "U")
    r = U.shape[1]
    if np.max(np.abs(U.T @ U - np.eye(r))) > 1e-8:
        raise InputError("coherence needs orthonormal columns")
    return float(np.max(np.einsum("ij,ij->i", U, U)))


def export_matrix_market(M, path, comment=""):
    """Write a generated matrix in Matrix Market coordinate format."""
    A = M.A if isinstance(M, FactoredMatrix) else as_matrix(M)
    if isinstance(M, FactoredMatrix) and not comment:
        comment = f"sketchbal family={M.family}"
    scipy.io.mmwrite(str(path), scipy.sparse.coo_matrix(A), comment=comment,
                     precision=17)
