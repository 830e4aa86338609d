"""Empirical checks of the balanced sketch's guarantees with measured constants.

Both checks substitute the measured distortion ``eps = measured_epsilon(Phi, U)``
and the measured ``kappa(A)`` into the bounds, which then hold
deterministically rather than with high probability.
"""

from dataclasses import dataclass

import numpy as np

from ..balance import RlcbConfig, balanced_sketch
from ..errors import ParameterError
from ..linalg import thin_svd
from ..matrixzoo import gen_structured
from ..rng import MATRIX_OFFSET, SKETCH_OFFSET, make_rng, standard_normal, trial_seed
from ..sketch import apply_sketch, gen_countsketch, measured_epsilon

# multiplicative slack for comparing floating-point values against a bound
# that can be attained with equality (e.g. isotropic A)
ROUNDING_SLACK = 1e-12
FLAT_TOL = 1e-8
PERTURB_METHODS = ("exact", "rlcb")
PERTURB_OFFSET = 4


@dataclass(frozen=True)
class SandwichCheck:
    eps_hat: float
    kappa: float
    sigma_A: np.ndarray
    sigma_SA: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    kappa_SA: float
    sandwich_ok: bool
    flat_ok: bool

    @property
    def passed(self):
        return self.sandwich_ok and self.flat_ok


def theorem1_sandwich(A, Phi, mode="exact_geometric", r=None, sigma_A=None):
    """Evaluate the constant-factor sandwich for ``S = W Phi`` on ``A``.

    Checks ``((1 - eps)/kappa) sigma_i(A) <= sigma_i(SA) <= (1 + eps) kappa sigma_i(A)``
    for every retained ``i``, and ``kappa(SA) = 1`` to ``1e-8``. ``sigma_A``
    (the computed top-``r`` singular values of ``A``) may be passed to reuse it
    across sketches.
    """
    U, sigma, _ = A.factors(r)
    r = sigma.shape[0]
    if sigma_A is None:
        sigma_A = thin_svd(A.A, r).sigma
    kappa = float(sigma_A[0] / sigma_A[-1])
    eps = measured_epsilon(Phi, U)
    _, SA = balanced_sketch(Phi, A.A, mode, r=r)
    sigma_SA = thin_svd(SA, r).sigma
    lower = (1 - eps) / kappa * sigma_A
    upper = (1 + eps) * kappa * sigma_A
    sandwich = bool(np.all(sigma_SA >= lower * (1 - ROUNDING_SLACK))
                    and np.all(sigma_SA <= upper * (1 + ROUNDING_SLACK)))
    kappa_SA = float(sigma_SA[0] / sigma_SA[-1])
    return SandwichCheck(eps, kappa, sigma_A, sigma_SA, lower, upper, kappa_SA,
                         sandwich, abs(kappa_SA - 1) <= FLAT_TOL)


def empirical_theorem1_check(A, Phi, mode="exact_geometric", r=None, sigma_A=None):
    return theorem1_sandwich(A, Phi, mode, r, sigma_A).passed


def lipschitz_constant(eps_hat, kappa):
    """``(1 + eps)^2 / (1 - eps) * kappa``; infinite once ``eps >= 1``."""
    if eps_hat >= 1:
        return float("inf")
    return (1 + eps_hat) ** 2 / (1 - eps_hat) * kappa


@dataclass(frozen=True)
class PerturbationReport:
    eta: float
    measured_shift: float
    bound: float
    satisfied: bool
    eps_hat: float
    kappa: float
    L: float


def perturbation_trial(A, S, eta, seed, delta=None, eps_hat=None, sigma_A=None):
    """Perturb ``A`` inside its singular subspaces and compare sketched spectra.

    Draws ``Delta`` (``r x r`` Gaussian scaled to ``||Delta||_2 = eta sigma_r(A)``),
    forms ``A + U Delta V^T`` and measures ``max_i |sigma_i(S Ahat) - sigma_i(S A)|``
    against ``L eta sigma_r(A)``. ``S`` must be a frozen balanced sketch
    built from ``A``. Pass ``delta`` to use a fixed perturbation instead;
    ``eps_hat`` and ``sigma_A`` may be passed to skip recomputing them.
    """
    if not 0 < eta < 1:
        raise ParameterError(f"eta must lie in (0, 1), got {eta}")
    if S.kind != "balanced":
        raise ParameterError("perturbation_trial needs a frozen balanced sketch")
    U, sigma, V = A.factors()
    r = sigma.shape[0]
    if sigma_A is None:
        sigma_A = thin_svd(A.A, r).sigma
    kappa = float(sigma_A[0] / sigma_A[-1])
    if delta is None:
        delta = standard_normal(make_rng(seed), (r, r))
        delta *= eta * sigma_A[-1] / thin_svd(delta, 1).sigma[0]
    if eps_hat is None:
        eps_hat = measured_epsilon(S.inner, U)
    A_hat = A.A + U @ delta @ V.T
    base = thin_svd(apply_sketch(S, A.A), r).sigma
    moved = thin_svd(apply_sketch(S, A_hat), r).sigma
    shift = float(np.max(np.abs(moved - base)))
    L = lipschitz_constant(eps_hat, kappa)
    bound = L * eta * float(sigma_A[-1])
    return PerturbationReport(float(eta), shift, bound, shift <= bound, eps_hat, kappa, L)


@dataclass(frozen=True)
class PerturbConfig:
    m: int = 1500
    n: int = 400
    r: int = 20
    sketch_sizes: tuple = (90, 180, 300)
    methods: tuple = ("exact", "rlcb")
    etas: tuple = (0.01, 0.1, 0.5)
    n_seeds: int = 100
    base_seed: int = 0
    rlcb: object = None

    def __post_init__(self):
        bad = [x for x in self.methods if x not in PERTURB_METHODS]
        if bad:
            raise ParameterError(f"unknown perturbation methods {bad}; choose from {PERTURB_METHODS}")
        for eta in self.etas:
            if not 0 < eta < 1:
                raise ParameterError(f"eta must lie in (0, 1), got {eta}")


@dataclass(frozen=True)
class PerturbationRow:
    family: str
    method: str
    s: int
    eta: float
    seed: int
    report: PerturbationReport

    def sort_key(self):
        return (self.eta, self.seed, self.method, self.s)


def run_perturbation_suite(cfg):
    """Perturbation bound over ``etas x seeds x sizes x methods`` (structured family).

    Rows come back sorted by ``(eta, seed)`` and then method and ``s``.
    """
    rlcb_cfg = cfg.rlcb or RlcbConfig(rank=cfg.r)
    rows = []
    for i in range(cfg.n_seeds):
        seed = trial_seed(cfg.base_seed, i)
        A = gen_structured(cfg.m, cfg.n, cfg.r, seed + MATRIX_OFFSET)
        sigma_A = thin_svd(A.A, cfg.r).sigma
        for s in cfg.sketch_sizes:
            Phi = gen_countsketch(s, cfg.m, seed + SKETCH_OFFSET)
            eps = measured_epsilon(Phi, A.U)
            for method in cfg.methods:
                mode = "exact_geometric" if method == "exact" else "rlcb"
                S, _ = balanced_sketch(Phi, A.A, mode, rlcb_cfg, r=cfg.r)
                for j, eta in enumerate(cfg.etas):
                    rep = perturbation_trial(A, S, eta, seed + PERTURB_OFFSET + j,
                                             eps_hat=eps, sigma_A=sigma_A)
                    rows.append(PerturbationRow("structured", method, int(s), float(eta),
                                                seed, rep))
    rows.sort(key=PerturbationRow.sort_key)
    return rows
