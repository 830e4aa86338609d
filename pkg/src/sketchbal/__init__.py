"""Geometric balancing of sketched matrices, with the experiments that probe it."""

from ._backend import BACKEND
from .balance import (Balancer, RlcbConfig, apply_balancer, balanced_sketch,
                      build_balancer_exact, build_balancer_rlcb)
from .errors import (AggregationError, DimensionError, DivergenceError, InputError,
                     ParameterError, RankError, SketchbalError)
from .linalg import (SpectralSummary, ThinSVD, power_iteration_lambda_max, qr_orthonormalize,
                     spectral_summary, thin_svd)
from .matrixzoo import (FactoredMatrix, coherence, export_matrix_market, gen_adversarial,
                        gen_path_laplacian, gen_poisson2d, gen_structured)
from .sketch import (SketchOperator, apply_sketch, dense_sketch, gen_countsketch,
                     gen_gaussian, gen_osnap, measured_epsilon)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Balancer", "RlcbConfig", "apply_balancer", "balanced_sketch",
    "build_balancer_exact", "build_balancer_rlcb", "AggregationError", "DimensionError",
    "DivergenceError", "InputError", "ParameterError", "RankError", "SketchbalError",
    "SpectralSummary", "ThinSVD", "power_iteration_lambda_max", "qr_orthonormalize",
    "spectral_summary", "thin_svd", "FactoredMatrix", "coherence", "export_matrix_market",
    "gen_adversarial", "gen_path_laplacian", "gen_poisson2d", "gen_structured",
    "SketchOperator", "apply_sketch", "dense_sketch", "gen_countsketch", "gen_gaussian",
    "gen_osnap", "measured_epsilon",
]
