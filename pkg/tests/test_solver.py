import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sketchbal.errors import DivergenceError, ParameterError
from sketchbal.experiments.solver import SolverConfig, gd_least_squares, run_solver_suite


def test_identity_converges_in_one_step():
    b = np.array([3.0, -1.0, 2.0])
    tr = gd_least_squares(np.eye(3), b, 1.0)
    assert tr.iters_to_tol == 1 and tr.converged
    assert tr.final_residual == 0.0
    assert len(tr.residuals) == 2


def test_diagonal_closed_form_iteration_count():
    b = np.array([1.0, 1.0])
    tr = gd_least_squares(np.diag([2.0, 1.0]), b, 0.25)
    # first coordinate solved after one step; the second contracts by 0.75
    r0 = math.hypot(1.0, 1.0)
    k = 1
    while abs(b[1]) * 0.75 ** k > 1e-6 * r0:
        k += 1
    assert tr.iters_to_tol == k
    np.testing.assert_allclose(tr.residuals[1:], abs(b[1]) * 0.75 ** np.arange(1, k + 1),
                               rtol=1e-10)


def test_cap_sentinel():
    tr = gd_least_squares(np.diag([1.0, 1e-3]), np.ones(2), 1.0, cap=10)
    assert tr.iters_to_tol == 10 and not tr.converged
    assert len(tr.residuals) == 11


def test_divergence_and_bad_step():
    with pytest.raises(DivergenceError):
        gd_least_squares(np.eye(2) * 1e3, np.ones(2), 1e3, cap=200)
    with pytest.raises(ParameterError):
        gd_least_squares(np.eye(2), np.ones(2), 0.0)


def test_residual_operator_is_used():
    A = np.diag([1.0, 2.0, 3.0])
    b = np.ones(3)
    M, bm = A[:2], b[:2]
    tr = gd_least_squares(M, bm, 0.25, residual_operator=A, residual_rhs=b)
    assert tr.residuals[0] == pytest.approx(np.sqrt(3))
    assert tr.sketched_residuals[0] == pytest.approx(np.sqrt(2))
    # the third equation is never touched, so the original residual stalls at 1
    assert tr.final_residual == pytest.approx(1.0, rel=1e-6)
    assert not tr.converged and tr.sketched_iters_to_tol < tr.iters_to_tol


@given(st.integers(0, 10_000), st.integers(2, 12), st.integers(1, 6))
def test_sketched_residual_monotone(seed, rows, cols):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((rows, cols))
    b = rng.standard_normal(rows)
    lam = np.linalg.eigvalsh(M.T @ M)[-1]
    tr = gd_least_squares(M, b, 1.0 / lam, cap=50)
    res = np.array(tr.residuals)
    assert np.all(np.diff(res) <= 1e-12 * max(1.0, res[0]))


def test_suite_small_problems():
    cfg = SolverConfig(poisson_k=6, path_p=40, s=25, r=5, cap=60)
    traces = run_solver_suite(cfg)
    assert [(t.problem, t.method) for t in traces] == [
        (p, m) for p in ("poisson2d", "path_laplacian")
        for m in ("original", "countsketch", "rlcb")]
    for t in traces:
        assert len(t.residuals) == t.iters_to_tol + 1 or t.converged
        assert t.iters_to_tol <= cfg.cap
    r0 = {t.problem: t.initial_residual for t in traces if t.method == "original"}
    assert all(t.initial_residual == r0[t.problem] for t in traces)
    with pytest.raises(ParameterError):
        run_solver_suite(SolverConfig(poisson_k=4, s=20, r=5))
