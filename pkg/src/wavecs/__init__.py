"""Weighted l1 recovery of wavelet-sparse signals and images from random samples."""

from .dwt import CoefficientVector, IndexMap, MultiIndex, forward_dwt, inverse_dwt
from .errors import DataError, DimensionError, ParameterError, ResourceError, WavecsError
from .framelet import FrameletDictionary, framelet_analysis, framelet_synthesis, solve_framelet_inpaint
from .harness import Experiment, compare_schemes, compare_trials, run_experiment
from .measurements import MeasurementSet
from .solver import SolverConfig, solve_mmv, solve_reweighted, solve_weighted_l1
from .tree import k_tree_sup, random_closed_tree, verify_inequalities
from .weights import SchemeSpec, alpha_weights, uniform_norm_weights, unweighted

__version__ = "0.1.0"

__all__ = [
    "CoefficientVector",
    "DataError",
    "DimensionError",
    "Experiment",
    "FrameletDictionary",
    "IndexMap",
    "MeasurementSet",
    "MultiIndex",
    "ParameterError",
    "ResourceError",
    "SchemeSpec",
    "SolverConfig",
    "WavecsError",
    "alpha_weights",
    "compare_schemes",
    "compare_trials",
    "forward_dwt",
    "framelet_analysis",
    "framelet_synthesis",
    "inverse_dwt",
    "k_tree_sup",
    "random_closed_tree",
    "run_experiment",
    "solve_framelet_inpaint",
    "solve_mmv",
    "solve_reweighted",
    "solve_weighted_l1",
    "uniform_norm_weights",
    "unweighted",
    "verify_inequalities",
]
