"""Experiment drivers: synthetic distortion suite, solver comparison, stability checks."""

from .solver import SolverConfig, SolverTrace, gd_least_squares, run_solver_suite
from .stability import (PerturbConfig, PerturbationReport, empirical_theorem1_check,
                        lipschitz_constant, perturbation_trial, run_perturbation_suite,
                        theorem1_sandwich)
from .synthetic import (SuccessWindow, SummaryRow, SyntheticConfig, TrialRecord,
                        distortion_metrics, evaluate_success, run_synthetic_suite, summarize)
