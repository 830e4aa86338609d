"""Inner loops: sparse sketch application, Householder QR, one-sided Jacobi.

Each kernel has a numba version (``*_nb``) and a numpy version (``*_np``).
The public wrappers pick numba when it is available and the data is float64;
anything else (``np.longdouble`` for the extended-precision balancer, or a
numba-less install) runs the numpy version. Both versions implement the same
algorithm but are not guaranteed to agree bit-for-bit, except
``sparse_apply`` whose accumulation order is identical by construction.
"""

import math

import numpy as np

from ._backend import HAS_NUMBA, njit

# ---------------------------------------------------------------------------
# sparse column-stored sketch times dense matrix


@njit(cache=True)
def _sparse_apply_nb(rows, vals, s, A):
    m, b = rows.shape
    n = A.shape[1]
    out = np.zeros((s, n))
    for j in range(m):
        for t in range(b):
            r = rows[j, t]
            w = vals[j, t]
            for k in range(n):
                out[r, k] += w * A[j, k]
    return out


def _sparse_apply_np(rows, vals, s, A):
    m, b = rows.shape
    out = np.zeros((s, A.shape[1]), dtype=A.dtype)
    contrib = vals.reshape(-1, 1).astype(A.dtype) * np.repeat(A, b, axis=0)
    # np.add.at is unbuffered and walks indices in order: same sums as the loop
    np.add.at(out, rows.reshape(-1), contrib)
    return out


def sparse_apply(rows, vals, s, A):
    """Compute ``S @ A`` for a sketch stored column-wise.

    ``rows[j, t]`` and ``vals[j, t]`` give the row index and value of the
    ``t``-th nonzero in column ``j`` of ``S``. Cost is ``O(nnz(S) * A.shape[1])``.
    """
    if HAS_NUMBA and A.dtype == np.float64:
        return _sparse_apply_nb(rows, vals, int(s), np.ascontiguousarray(A))
    return _sparse_apply_np(rows, vals, int(s), A)


# ---------------------------------------------------------------------------
# Householder QR, optionally with column pivoting and early rank truncation


@njit(cache=True)
def _householder_qr_nb(A, pivot, tol):
    # loops run row-outer so the row-major A is walked contiguously
    m, n = A.shape
    kmax = min(m, n)
    perm = np.arange(n)
    vs = np.zeros((m, kmax))
    betas = np.zeros(kmax)
    acc = np.zeros(n)
    rank = kmax
    for k in range(kmax):
        if pivot:
            acc[k:] = 0.0
            for i in range(k, m):
                for j in range(k, n):
                    acc[j] += A[i, j] * A[i, j]
            p = k
            for j in range(k + 1, n):
                if acc[j] > acc[p]:
                    p = j
            if math.sqrt(acc[p]) <= tol:
                rank = k
                break
            if p != k:
                for i in range(m):
                    tmp = A[i, k]
                    A[i, k] = A[i, p]
                    A[i, p] = tmp
                tp = perm[k]
                perm[k] = perm[p]
                perm[p] = tp
        normx = 0.0
        for i in range(k, m):
            normx += A[i, k] * A[i, k]
        normx = math.sqrt(normx)
        if normx == 0.0:
            continue
        alpha = -normx if A[k, k] >= 0.0 else normx
        for i in range(k, m):
            vs[i, k] = A[i, k]
        vs[k, k] -= alpha
        vnorm2 = 0.0
        for i in range(k, m):
            vnorm2 += vs[i, k] * vs[i, k]
        beta = 2.0 / vnorm2
        betas[k] = beta
        acc[k:] = 0.0
        for i in range(k, m):
            vi = vs[i, k]
            for j in range(k + 1, n):
                acc[j] += vi * A[i, j]
        for i in range(k, m):
            vi = beta * vs[i, k]
            for j in range(k + 1, n):
                A[i, j] -= vi * acc[j]
        A[k, k] = alpha
        for i in range(k + 1, m):
            A[i, k] = 0.0
    return A, vs, betas, perm, rank


def _householder_qr_np(A, pivot, tol):
    m, n = A.shape
    kmax = min(m, n)
    perm = np.arange(n)
    vs = np.zeros((m, kmax), dtype=A.dtype)
    betas = np.zeros(kmax, dtype=A.dtype)
    rank = kmax
    for k in range(kmax):
        if pivot:
            tail = A[k:, k:]
            norms2 = np.einsum("ij,ij->j", tail, tail)
            p = k + int(np.argmax(norms2))
            if math.sqrt(float(norms2[p - k])) <= tol:
                rank = k
                break
            if p != k:
                A[:, [k, p]] = A[:, [p, k]]
                perm[[k, p]] = perm[[p, k]]
        x = A[k:, k]
        normx = np.sqrt(x @ x)
        if normx == 0:
            continue
        alpha = -normx if x[0] >= 0 else normx
        v = x.copy()
        v[0] -= alpha
        beta = 2 / (v @ v)
        vs[k:, k] = v
        betas[k] = beta
        if k + 1 < n:
            d = beta * (v @ A[k:, k + 1:])
            A[k:, k + 1:] -= np.outer(v, d)
        A[k, k] = alpha
        A[k + 1:, k] = 0
    return A, vs, betas, perm, rank


@njit(cache=True)
def _form_q_nb(vs, betas, rank, q):
    m = vs.shape[0]
    Q = np.zeros((m, q))
    for i in range(min(m, q)):
        Q[i, i] = 1.0
    d = np.zeros(q)
    for k in range(rank - 1, -1, -1):
        beta = betas[k]
        if beta == 0.0:
            continue
        d[:] = 0.0
        for i in range(k, m):
            vi = vs[i, k]
            for j in range(q):
                d[j] += vi * Q[i, j]
        for i in range(k, m):
            vi = beta * vs[i, k]
            for j in range(q):
                Q[i, j] -= vi * d[j]
    return Q


def _form_q_np(vs, betas, rank, q):
    m = vs.shape[0]
    Q = np.eye(m, q, dtype=vs.dtype)
    for k in range(rank - 1, -1, -1):
        if betas[k] == 0:
            continue
        v = vs[k:, k]
        Q[k:, :] -= np.outer(v, betas[k] * (v @ Q[k:, :]))
    return Q


def householder_qr(A, pivot=False, tol=0.0, q=None):
    """Householder QR of ``A`` (rows >= cols not required).

    Returns ``(Q, R, perm, rank)`` with ``A[:, perm] ~= Q @ R``. ``Q`` has ``q``
    orthonormal columns, at least ``rank`` of them; columns past ``rank``
    complete the basis. ``R`` is ``rank x n`` upper trapezoidal. With ``pivot=True``
    the factorization stops once every remaining column norm is ``<= tol``.
    """
    work = np.array(A, copy=True)
    if HAS_NUMBA and work.dtype == np.float64:
        R, vs, betas, perm, rank = _householder_qr_nb(work, bool(pivot), float(tol))
    else:
        R, vs, betas, perm, rank = _householder_qr_np(work, bool(pivot), tol)
    q = rank if q is None else max(int(q), rank)
    if HAS_NUMBA and work.dtype == np.float64:
        Q = _form_q_nb(vs, betas, rank, q)
    else:
        Q = _form_q_np(vs, betas, rank, q)
    return Q, np.triu(R[:rank, :]), perm, rank


# ---------------------------------------------------------------------------
# one-sided (Hestenes) Jacobi


@njit(cache=True)
def _jacobi_nb(Z, tol, max_sweeps):
    # Z holds the columns of Y as contiguous rows
    n, m = Z.shape
    V = np.eye(n)  # row i of V is column i of the accumulated rotation
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                a = 0.0
                b = 0.0
                g = 0.0
                for k in range(m):
                    a += Z[i, k] * Z[i, k]
                    b += Z[j, k] * Z[j, k]
                    g += Z[i, k] * Z[j, k]
                if a == 0.0 or b == 0.0 or abs(g) <= tol * math.sqrt(a * b):
                    continue
                rotated = True
                zeta = (b - a) / (2.0 * g)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                for k in range(m):
                    zi = Z[i, k]
                    zj = Z[j, k]
                    Z[i, k] = c * zi - s * zj
                    Z[j, k] = s * zi + c * zj
                for k in range(n):
                    vi = V[i, k]
                    vj = V[j, k]
                    V[i, k] = c * vi - s * vj
                    V[j, k] = s * vi + c * vj
        if not rotated:
            break
    return Z, V, sweeps


def _round_robin(n):
    """Pairings for one Jacobi sweep, ``n - 1`` rounds of disjoint pairs."""
    players = list(range(n + (n % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = [(players[k], players[size - 1 - k]) for k in range(size // 2)]
        pairs = [(min(p), max(p)) for p in pairs if max(p) < n]
        if pairs:
            rounds.append((np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _jacobi_np(Y, tol, max_sweeps):
    n = Y.shape[1]
    V = np.eye(n, dtype=Y.dtype)
    rounds = _round_robin(n)
    sweeps = 0
    one = Y.dtype.type(1)
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        rotated = False
        for I, J in rounds:
            Yi, Yj = Y[:, I], Y[:, J]
            a = np.einsum("ij,ij->j", Yi, Yi)
            b = np.einsum("ij,ij->j", Yj, Yj)
            g = np.einsum("ij,ij->j", Yi, Yj)
            act = (a != 0) & (b != 0) & (np.abs(g) > tol * np.sqrt(a * b))
            if not act.any():
                continue
            rotated = True
            I, J, a, b, g = I[act], J[act], a[act], b[act], g[act]
            zeta = (b - a) / (2 * g)
            t = np.copysign(one, zeta) / (np.abs(zeta) + np.hypot(one, zeta))
            c = one / np.sqrt(one + t * t)
            s = c * t
            Yi, Yj = Y[:, I], Y[:, J]
            Y[:, I] = c * Yi - s * Yj
            Y[:, J] = s * Yi + c * Yj
            Vi, Vj = V[:, I], V[:, J]
            V[:, I] = c * Vi - s * Vj
            V[:, J] = s * Vi + c * Vj
        if not rotated:
            break
    return Y, V, sweeps


def jacobi_orthogonalize(Y, tol=None, max_sweeps=60):
    """Rotate the columns of ``Y`` until they are mutually orthogonal.

    Returns ``(Y @ V, V, sweeps)`` with ``V`` orthogonal. The default
    tolerance is ``sqrt(rows) * eps`` for ``Y``'s dtype.
    """
    work = np.array(Y, copy=True)
    if tol is None:
        tol = math.sqrt(work.shape[0]) * float(np.finfo(work.dtype).eps)
    if HAS_NUMBA and work.dtype == np.float64:
        Z, Vt, sweeps = _jacobi_nb(np.ascontiguousarray(work.T), float(tol), int(max_sweeps))
        return Z.T, Vt.T, sweeps
    return _jacobi_np(work, work.dtype.type(tol), int(max_sweeps))
