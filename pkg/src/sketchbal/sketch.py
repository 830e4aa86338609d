"""Oblivious sketch families: dense Gaussian, CountSketch and OSNAP.

Sparse sketches are stored column-wise as ``(m, b)`` arrays of row indices
and values, the layout ``S @ A`` walks. A ``balanced`` operator wraps an
inner sketch together with a frozen :class:`~sketchbal.balance.Balancer`.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import DimensionError, InputError, ParameterError
from .linalg import as_matrix, thin_svd
from .rng import make_rng, standard_normal

KINDS = ("gaussian", "countsketch", "osnap", "balanced")
DEFAULT_OSNAP_B = 4


def _readonly(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SketchOperator:
    """An ``s x m`` sketching matrix.

    Exactly one payload is populated, depending on ``kind``: ``dense`` for
    gaussian; ``rows``/``vals`` for countsketch and osnap; ``inner`` and
    ``balancer`` for balanced.
    """

    kind: str
    s: int
    m: int
    seed: Optional[int] = None
    b: int = 0
    dense: Optional[np.ndarray] = None
    rows: Optional[np.ndarray] = None
    vals: Optional[np.ndarray] = None
    inner: Optional["SketchOperator"] = None
    balancer: object = None

    @property
    def nnz(self):
        if self.kind in ("countsketch", "osnap"):
            return int(np.count_nonzero(self.vals))
        return int(np.count_nonzero(self.to_dense()))

    def to_dense(self):
        """Materialize ``S`` as an ``s x m`` array (for tests and small cases)."""
        if self.kind == "gaussian":
            return np.array(self.dense)
        if self.kind in ("countsketch", "osnap"):
            out = np.zeros((self.s, self.m))
            cols = np.repeat(np.arange(self.m), self.rows.shape[1])
            np.add.at(out, (self.rows.reshape(-1), cols), self.vals.reshape(-1))
            return out
        return apply_sketch(self, np.eye(self.m))


def _check_dims(s, m):
    s, m = int(s), int(m)
    if s < 1 or m < 1:
        raise DimensionError(f"sketch dimensions must be positive, got s={s}, m={m}")
    return s, m


def dense_sketch(M, seed=None):
    """Wrap an explicit ``s x m`` matrix as a dense sketch operator."""
    M = np.array(as_matrix(M, "M"))
    return SketchOperator("gaussian", M.shape[0], M.shape[1], seed=seed,
                          dense=_readonly(M))


def gen_gaussian(s, m, seed):
    """Dense sketch with i.i.d. N(0, 1/s) entries."""
    s, m = _check_dims(s, m)
    dense = standard_normal(make_rng(seed), (s, m)) / np.sqrt(s)
    return SketchOperator("gaussian", s, m, seed=int(seed), dense=_readonly(dense))


def gen_countsketch(s, m, seed):
    """CountSketch: column ``j`` holds a single ``+-1`` in a uniform row."""
    s, m = _check_dims(s, m)
    rng = make_rng(seed)
    rows = rng.integers(0, s, size=m).reshape(m, 1)
    vals = (2.0 * rng.integers(0, 2, size=m) - 1.0).reshape(m, 1)
    return SketchOperator("countsketch", s, m, seed=int(seed), b=1,
                          rows=_readonly(rows), vals=_readonly(vals))


def gen_osnap(s, m, b=DEFAULT_OSNAP_B, seed=0):
    """OSNAP with ``b`` distinct rows per column, values ``+-1/sqrt(b)``."""
    s, m = _check_dims(s, m)
    b = int(b)
    if not 1 <= b <= s:
        raise ParameterError(f"OSNAP needs 1 <= b <= s, got b={b}, s={s}")
    rng = make_rng(seed)
    # a random permutation per column; its first b entries are the rows
    keys = rng.random((m, s))
    rows = np.sort(np.argsort(keys, axis=1, kind="stable")[:, :b], axis=1)
    vals = (2.0 * rng.integers(0, 2, size=(m, b)) - 1.0) / np.sqrt(b)
    return SketchOperator("osnap", s, m, seed=int(seed), b=b,
                          rows=_readonly(rows), vals=_readonly(vals))


def apply_sketch(S, A):
    """Return ``S @ A``. A 1-D ``A`` is treated as a single column."""
    vector = np.ndim(A) == 1
    A2 = as_matrix(np.reshape(A, (-1, 1)) if vector else A)
    if A2.shape[0] != S.m:
        raise DimensionError(f"sketch expects {S.m} rows, got {A2.shape[0]}")
    if S.kind == "gaussian":
        out = S.dense @ A2
    elif S.kind in ("countsketch", "osnap"):
        out = kernels.sparse_apply(S.rows, S.vals, S.s, A2)
    elif S.kind == "balanced":
        from .balance import apply_balancer

        out = apply_balancer(S.balancer, apply_sketch(S.inner, A2))
    else:
        raise ParameterError(f"unknown sketch kind {S.kind!r}")
    return out[:, 0] if vector else out


def measured_epsilon(S, U):
    """Empirical subspace-embedding distortion of ``S`` on ``range(U)``.

    ``max(sigma_max(S U) - 1, 1 - sigma_min(S U))`` for orthonormal ``U``.
    """
    U = as_matrix(U, "U")
    r = U.shape[1]
    if np.max(np.abs(U.T @ U - np.eye(r))) > 1e-8:
        raise InputError("U must have orthonormal columns")
    SU = apply_sketch(S, U)
    k = min(r, SU.shape[0])
    sigma = thin_svd(SU, k).sigma
    smin = sigma[-1] if k == r else 0.0
    return float(max(sigma[0] - 1.0, 1.0 - smin))
