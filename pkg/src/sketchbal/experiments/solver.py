"""Gradient-descent least squares on original and sketched systems.

Sketched variants iterate on ``min ||S A x - S b||`` (sketch-and-solve) but
every trace reports the original-space residual ``||A x_k - b||``.
"""

from dataclasses import dataclass, field

import numpy as np

from ..balance import RlcbConfig, balanced_sketch
from ..errors import DivergenceError, ParameterError
from ..linalg import as_matrix, power_iteration_lambda_max
from ..matrixzoo import gen_path_laplacian, gen_poisson2d
from ..rng import SKETCH_OFFSET, make_rng, standard_normal, trial_seed
from ..sketch import apply_sketch, gen_countsketch

RHS_OFFSET = 2
POWER_OFFSET = 3
SOLVER_METHODS = ("original", "countsketch", "rlcb")


@dataclass
class SolverTrace:
    problem: str
    method: str
    residuals: list
    sketched_residuals: list
    iters_to_tol: int
    converged: bool
    alpha: float
    # first k with ||M x_k - b|| <= tol ||b|| on the iterated system itself
    # (equals iters_to_tol for the original method); cap if never reached
    sketched_iters_to_tol: int = 0

    @property
    def initial_residual(self):
        return self.residuals[0]

    @property
    def final_residual(self):
        return self.residuals[-1]


def gd_least_squares(M, b, alpha, tol=1e-6, cap=200, residual_operator=None,
                     residual_rhs=None, problem="", method="original"):
    """Gradient descent ``x <- x - alpha M^T (M x - b)`` from ``x = 0``.

    Stops at the first ``k`` with ``||R x_k - c|| <= tol ||R x_0 - c||`` where
    ``(R, c)`` is ``(residual_operator, residual_rhs)``, defaulting to
    ``(M, b)``; otherwise runs ``cap`` steps and reports ``iters_to_tol = cap``
    with ``converged = False``. When a separate residual operator is given
    the trace also records the iterated system's own residual.
    """
    M = as_matrix(M, "M")
    b = np.asarray(b, dtype=float)
    if alpha <= 0:
        raise ParameterError(f"step size must be positive, got {alpha}")
    sketched = residual_operator is not None
    R = M if residual_operator is None else as_matrix(residual_operator, "residual_operator")
    c = b if residual_rhs is None else np.asarray(residual_rhs, dtype=float)

    x = np.zeros(M.shape[1])
    residuals = [float(np.linalg.norm(c))]
    inner = [float(np.linalg.norm(b))] if sketched else []
    target = tol * residuals[0]
    iters, converged = int(cap), False
    inner_iters = int(cap)
    for k in range(1, int(cap) + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            x = x - alpha * (M.T @ (M @ x - b))
        if not np.all(np.isfinite(x)):
            raise DivergenceError(
                f"{problem}/{method}: iterate became non-finite at step {k} (alpha={alpha:.3e})")
        residuals.append(float(np.linalg.norm(R @ x - c)))
        if sketched:
            inner.append(float(np.linalg.norm(M @ x - b)))
            if inner_iters == cap and inner[-1] <= tol * inner[0]:
                inner_iters = k
        if residuals[-1] <= target:
            iters, converged = k, True
            break
    if not sketched:
        inner_iters = iters
    return SolverTrace(problem, method, residuals, inner, iters, converged, float(alpha),
                       inner_iters)


@dataclass(frozen=True)
class SolverConfig:
    poisson_k: int = 16
    path_p: int = 300
    s: int = 90
    r: int = 20
    tol: float = 1e-6
    cap: int = 200
    base_seed: int = 0
    power_iters: int = 200
    rlcb: RlcbConfig = field(default_factory=RlcbConfig)

    def problems(self):
        return (("poisson2d", gen_poisson2d(self.poisson_k).A),
                ("path_laplacian", gen_path_laplacian(self.path_p).A))


def run_solver_suite(cfg):
    """Three GD variants per problem: original, CountSketch, RLCB."""
    seed = trial_seed(cfg.base_seed, 0)
    traces = []
    for problem, A in cfg.problems():
        m = A.shape[0]
        if cfg.s > m:
            raise ParameterError(f"sketch size {cfg.s} exceeds {problem} dimension {m}")
        b = standard_normal(make_rng(seed + RHS_OFFSET), m)
        Phi = gen_countsketch(cfg.s, m, seed + SKETCH_OFFSET)
        S_rlcb, SA_rlcb = balanced_sketch(Phi, A, "rlcb", cfg.rlcb, r=cfg.r)
        systems = {
            "original": (A, b),
            "countsketch": (apply_sketch(Phi, A), apply_sketch(Phi, b)),
            "rlcb": (SA_rlcb, apply_sketch(S_rlcb, b)),
        }
        for method in SOLVER_METHODS:
            M, bm = systems[method]
            lam = power_iteration_lambda_max(M, cfg.power_iters, seed + POWER_OFFSET)
            kwargs = {} if method == "original" else {"residual_operator": A, "residual_rhs": b}
            traces.append(gd_least_squares(M, bm, 1.0 / lam, cfg.tol, cfg.cap,
                                           problem=problem, method=method, **kwargs))
    return traces
