"""Rank-based diffusion models of size distributions and their Zipf analysis.

Submodules
----------
families    first-order families, stable gap laws, slope parameters
simulate    Euler schemes for rank-based and random-growth systems
estimation  panel estimators and the first-order approximation
zipf        classification and stable-law conservation/completeness checks
io, svg     file formats and plotting
cli         the ``atlaszipf`` command
"""

from .errors import (AtlasZipfError, DomainError, EstimationError, FormatError,
                     ParameterError, SimulationError, TuningError)
from .families import (AtlasParams, FirstOrderFamily, StableGapSample, ValidationReport,
                       is_simple, make_atlas_family, make_e1_family, sample_stable,
                       sample_stable_gaps, slope_bracket, slope_parameter,
                       theoretical_gap_variance, theoretical_lambda, theoretical_mean_gap,
                       validate_family)
from .simulate import (PathEnsemble, RandomGrowthSpec, SimulationConfig, iter_first_order,
                       random_growth_to_family, rank_permutation, simulate_atlas,
                       simulate_first_order, simulate_random_growth, simulated_stats)
from .estimation import (DistributionCurve, PanelSeries, RankGapStats, common_depth,
                         curve_slope, detrend, distribution_curve, estimate_gap_variance,
                         estimate_lambda, estimate_stats, first_order_approx,
                         gaussian_smooth, mean_gap, predicted_curve, rank_based_diagnostic)
from .zipf import (ExpectationEstimate, Tolerances, Verdict, ZipfClassification, classify,
                   completeness_estimate, conservation_estimate, proposition2_check,
                   top_weight, tune_e1_rho)
from .io import load_family, load_panel_csv, save_family, save_panel_csv
from .svg import emit_curve
from .cli import cli_main

__version__ = "0.1.0"
