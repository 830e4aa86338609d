import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sketchbal.errors import AggregationError, ParameterError
from sketchbal.experiments.synthetic import (SuccessWindow, SyntheticConfig, TrialRecord,
                                             distortion_metrics, evaluate_success,
                                             run_synthetic_suite, summarize)
from sketchbal.linalg import spectral_summary


def _rec(method="countsketch", s=90, trial=0, rel_max=1.0, rel_min=1.0, cond=1.0, ok=True):
    return TrialRecord("structured", method, s, trial, rel_max, rel_min, cond, ok, trial)


def test_distortion_metrics_trivial_cases():
    A = np.random.default_rng(0).standard_normal((30, 6))
    summ = spectral_summary(A, 6)
    assert distortion_metrics(summ, A, 6) == pytest.approx((1, 1, 1))
    assert distortion_metrics(summ, 2 * A, 6) == pytest.approx((2, 2, 1))


def test_distortion_metrics_rank_collapse():
    A = np.eye(4)
    SA = np.diag([1.0, 1.0, 1.0, 0.0])
    rel_max, rel_min, cond = distortion_metrics(spectral_summary(A, 4), SA, 4)
    assert rel_min == 0 and math.isinf(cond)
    assert not evaluate_success((rel_max, rel_min, cond))


@given(st.integers(0, 10_000), st.integers(3, 8))
def test_ratio_identity(seed, r):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((20, r))
    SA = rng.standard_normal((12, 20)) @ A
    rel_max, rel_min, cond = distortion_metrics(spectral_summary(A, r), SA, r)
    assert cond * rel_min == pytest.approx(rel_max, rel=1e-10)


def test_evaluate_success_examples():
    assert evaluate_success((1.3, 0.7, 0))
    assert evaluate_success((1.426, 0.887, 0))
    assert not evaluate_success((0.92, 8.46, 0))
    assert evaluate_success((2.0, 0.5, 0))
    assert not evaluate_success((1.3, 0.7, 0), SuccessWindow(0.8, 1.5))


def test_window_validation():
    with pytest.raises(ParameterError):
        SuccessWindow(1.5, 2.0)
    with pytest.raises(ParameterError):
        SuccessWindow(0.0, 2.0)


def test_summarize_two_point():
    rows = summarize([_rec(rel_max=1.0, trial=0), _rec(rel_max=3.0, trial=1, ok=False)])
    (row,) = rows
    assert row.rel_max_mean == 2.0
    assert row.rel_max_sd == pytest.approx(math.sqrt(2))
    assert row.success_rate == 0.5
    assert row.n_trials == 2


def test_summarize_identical_and_single():
    rows = summarize([_rec(trial=i) for i in range(4)] + [_rec(method="rlcb")])
    assert [r.method for r in rows] == ["countsketch", "rlcb"]
    assert all(r.rel_max_sd == 0 and r.cond_ratio_sd == 0 for r in rows)
    with pytest.raises(AggregationError):
        summarize([])


def test_small_suite_counts_and_determinism():
    cfg = SyntheticConfig(m=200, n=60, r=8, sketch_sizes=(30, 50), n_trials=2)
    recs = run_synthetic_suite(cfg)
    assert len(recs) == 2 * 3 * 2 * 2
    assert recs == run_synthetic_suite(cfg)
    assert recs == sorted(recs, key=TrialRecord.sort_key)
    for rec in recs:
        assert rec.success == (cfg.window.contains(rec.rel_max)
                               and cfg.window.contains(rec.rel_min))


def test_all_methods_run():
    cfg = SyntheticConfig(m=150, n=40, r=6, sketch_sizes=(30,), n_trials=1,
                          methods=("gaussian", "countsketch", "osnap", "rlcb", "exact"))
    recs = run_synthetic_suite(cfg)
    exact = [r for r in recs if r.method == "exact"]
    assert all(r.cond_ratio * (1.2 / (1 + 0.2 / 6)) == pytest.approx(1, abs=1e-8)
               for r in exact if r.family == "structured")


def test_config_validation():
    with pytest.raises(ParameterError):
        SyntheticConfig(methods=("bogus",))
    with pytest.raises(ParameterError):
        SyntheticConfig(families=("nope",))
