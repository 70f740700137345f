"""Numerical laboratory for the finite-dimensional Kalton-Peck twisted sum."""

from .space import (
    TwistedVector,
    block_symmetry_apply,
    kp_map,
    kp_norm,
    quasilinearity_defect,
)
from .operators import (
    SelectionReport,
    SplitOperator,
    flat_unit_vector,
    gamma_threshold_subset,
    nested_selection,
    rank_one_selection,
    rms_gamma_check,
)
from .opnorm import NormEstimate, identity_norms, opnorm_lower, opnorm_upper, phi_max
from .summing import (
    WitnessFamily,
    gamma_inf_reduction,
    i1_trace_lower,
    linf_inverse_norm,
    pi1_lower_identity,
    pi1_lower_linf,
)
from .asymmetry import GroupSpec, asym_mc, is_rich, sample_group, trace_duality_sandwich
from .oracles import GridSpec, exhaustive_signs, grid_opnorm, two_level_phi
from .sweep import FitResult, SweepRecord, check_suites, emit, fit_growth, run_sweep

__version__ = "0.1.0"

__all__ = [
    "TwistedVector",
    "kp_norm",
    "kp_map",
    "quasilinearity_defect",
    "block_symmetry_apply",
    "SplitOperator",
    "SelectionReport",
    "flat_unit_vector",
    "rms_gamma_check",
    "gamma_threshold_subset",
    "nested_selection",
    "rank_one_selection",
    "NormEstimate",
    "opnorm_lower",
    "opnorm_upper",
    "phi_max",
    "identity_norms",
    "WitnessFamily",
    "pi1_lower_identity",
    "pi1_lower_linf",
    "gamma_inf_reduction",
    "i1_trace_lower",
    "linf_inverse_norm",
    "GroupSpec",
    "sample_group",
    "is_rich",
    "asym_mc",
    "trace_duality_sandwich",
    "GridSpec",
    "grid_opnorm",
    "exhaustive_signs",
    "two_level_phi",
    "SweepRecord",
    "FitResult",
    "run_sweep",
    "fit_growth",
    "check_suites",
    "emit",
]
