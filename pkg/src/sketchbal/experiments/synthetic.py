"""Monte Carlo distortion harness over the synthetic matrix families."""

from dataclasses import dataclass, field
from itertools import groupby

import numpy as np

from ..balance import RlcbConfig, balanced_sketch
from ..errors import AggregationError, ParameterError
from ..linalg import spectral_summary
from ..matrixzoo import gen_adversarial, gen_structured
from ..rng import MATRIX_OFFSET, SKETCH_OFFSET, trial_seed
from ..sketch import apply_sketch, gen_countsketch, gen_gaussian, gen_osnap

GENERATORS = {"structured": gen_structured, "adversarial": gen_adversarial}
# rlcb and exact balance a CountSketch drawn from the same seed as the
# countsketch method, so the three are paired trial by trial
METHODS = ("gaussian", "countsketch", "osnap", "rlcb", "exact")


@dataclass(frozen=True)
class SuccessWindow:
    lower: float = 0.5
    upper: float = 2.0

    def __post_init__(self):
        if not (0 < self.lower <= 1 <= self.upper):
            raise ParameterError(
                f"window needs 0 < lower <= 1 <= upper, got ({self.lower}, {self.upper})")

    def contains(self, x):
        return self.lower <= x <= self.upper


@dataclass(frozen=True)
class TrialRecord:
    family: str
    method: str
    s: int
    trial: int
    rel_max: float
    rel_min: float
    cond_ratio: float
    success: bool
    seed: int

    def sort_key(self):
        return (self.family, self.method, self.s, self.trial)


@dataclass(frozen=True)
class SummaryRow:
    family: str
    method: str
    s: int
    n_trials: int
    success_rate: float
    rel_max_mean: float
    rel_max_sd: float
    rel_min_mean: float
    rel_min_sd: float
    cond_ratio_mean: float
    cond_ratio_sd: float


@dataclass(frozen=True)
class SyntheticConfig:
    m: int = 1500
    n: int = 400
    r: int = 20
    sketch_sizes: tuple = (90, 180, 300)
    methods: tuple = ("gaussian", "countsketch", "rlcb")
    families: tuple = ("structured", "adversarial")
    n_trials: int = 20
    base_seed: int = 0
    window: SuccessWindow = field(default_factory=SuccessWindow)
    rlcb: RlcbConfig = field(default_factory=RlcbConfig)
    osnap_b: int = 4

    def __post_init__(self):
        bad = [x for x in self.methods if x not in METHODS]
        if bad:
            raise ParameterError(f"unknown methods {bad}; choose from {METHODS}")
        bad = [x for x in self.families if x not in GENERATORS]
        if bad:
            raise ParameterError(f"unknown families {bad}; choose from {tuple(GENERATORS)}")


def distortion_metrics(A_summary, SA, r):
    """``(rel_max, rel_min, cond_ratio)`` of ``SA`` against ``A``'s summary.

    A rank-collapsed ``SA`` gives ``rel_min = 0`` and ``cond_ratio = inf``.
    """
    sa = spectral_summary(SA, r)
    rel_max = sa.sigma_max / A_summary.sigma_max
    rel_min = sa.sigma_min / A_summary.sigma_min
    if sa.rank_deficient:
        return rel_max, 0.0, float("inf")
    return rel_max, rel_min, sa.kappa / A_summary.kappa


def evaluate_success(metrics, window=SuccessWindow()):
    rel_max, rel_min = metrics[0], metrics[1]
    return bool(window.contains(rel_max) and window.contains(rel_min))


def make_sketch(method, s, m, seed, osnap_b=4):
    """The oblivious sketch underlying ``method``."""
    if method == "gaussian":
        return gen_gaussian(s, m, seed)
    if method == "osnap":
        return gen_osnap(s, m, osnap_b, seed)
    return gen_countsketch(s, m, seed)


def sketch_matrix(method, A, s, seed, r, rlcb_cfg, osnap_b=4):
    """Return ``S A`` for one method, building balancers where needed."""
    Phi = make_sketch(method, s, A.shape[0], seed, osnap_b)
    if method == "rlcb":
        return balanced_sketch(Phi, A, "rlcb", rlcb_cfg, r=r)[1]
    if method == "exact":
        return balanced_sketch(Phi, A, "exact_geometric", r=r)[1]
    return apply_sketch(Phi, A)


def run_synthetic_suite(cfg):
    """One :class:`TrialRecord` per (family, method, s, trial), canonically sorted."""
    records = []
    for family in cfg.families:
        gen = GENERATORS[family]
        for trial in range(cfg.n_trials):
            seed = trial_seed(cfg.base_seed, trial)
            A = gen(cfg.m, cfg.n, cfg.r, seed + MATRIX_OFFSET).A
            A_summary = spectral_summary(A, cfg.r)
            for method in cfg.methods:
                for s in cfg.sketch_sizes:
                    SA = sketch_matrix(method, A, s, seed + SKETCH_OFFSET, cfg.r,
                                       cfg.rlcb, cfg.osnap_b)
                    metrics = distortion_metrics(A_summary, SA, cfg.r)
                    records.append(TrialRecord(
                        family, method, int(s), trial, *metrics,
                        success=evaluate_success(metrics, cfg.window), seed=seed))
    records.sort(key=TrialRecord.sort_key)
    return records


def _mean_sd(values):
    x = np.asarray(values, dtype=float)
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return float(np.mean(x)), sd


def summarize(records):
    """Per (family, method, s) success rate plus mean and sample sd of each ratio."""
    if not records:
        raise AggregationError("no records to summarize")
    rows = []
    ordered = sorted(records, key=TrialRecord.sort_key)
    for (family, method, s), grp in groupby(ordered, key=lambda t: t.sort_key()[:3]):
        grp = list(grp)
        rows.append(SummaryRow(
            family, method, s, len(grp),
            float(np.mean([t.success for t in grp])),
            *_mean_sd([t.rel_max for t in grp]),
            *_mean_sd([t.rel_min for t in grp]),
            *_mean_sd([t.cond_ratio for t in grp]),
        ))
    return rows
