"""Simultaneous confidence cubes for the cell means of a 2x2 factorial
experiment that use uncertain prior information that the interaction is zero."""
from ._backend import backend_name
from .constants import CriticalConstants, compute_d, compute_d_tilde, compute_q, critical_constants
from .cube import CubeResult, Estimates, FactorialDataset, fit, general_cube, naive_cube, standard_cube
from .mc import McEstimate, mc_coverage, mc_sev
from .model import ConfigurationError, ModelConfig
from .optimizer import OptimizationProblem, OptimizationResult, min_coverage_search, optimize
from .performance import (
    PerformanceCurve,
    PerformancePoint,
    coverage,
    criterion,
    k_factor,
    performance_curve,
    scaled_expected_volume,
)
from .stats import ScaledChi
from .tuning import BSFunctions, TuningSpec

__version__ = "0.1.0"

__all__ = [
    "BSFunctions", "ConfigurationError", "CriticalConstants", "CubeResult", "Estimates",
    "FactorialDataset", "McEstimate", "ModelConfig", "OptimizationProblem", "OptimizationResult",
    "PerformanceCurve", "PerformancePoint", "ScaledChi", "TuningSpec", "backend_name",
    "compute_d", "compute_d_tilde", "compute_q", "coverage", "criterion", "critical_constants",
    "fit", "general_cube", "k_factor", "mc_coverage", "mc_sev", "min_coverage_search",
    "naive_cube", "optimize", "performance_curve", "scaled_expected_volume", "standard_cube",
]
