"""Nonlinear osmosis filtering.

A drift-diffusion evolution on positive images whose steady state is a
multiplicative rescaling of a reference image.  With masked drift fields
the same evolution removes shadows and light spots or reconstructs an
image from drift stored only on its edge set.
"""

from .analysis import (
    MetricReport,
    SpectrumReport,
    dense_spectrum,
    dense_update_matrix,
    energy,
    mean_value,
    mass,
    metric_report,
    mse,
    ssim,
)
from .diffusivity import DiffusivityField, DiffusivityParams, edge_g, pointwise_g
from .drift import (
    DriftField,
    canonical_drift,
    cdr_drift,
    read_drift_dump,
    shadow_drift,
    write_drift_dump,
)
from .errors import (
    ConvergenceError,
    DataError,
    NumericalQualityWarning,
    StabilityError,
)
from .grid import DEFAULT_FLOOR, DIRECTIONS, GridSpec, Image, Mask, validate_positive
from .operator import (
    StencilOperator,
    StructureReport,
    apply,
    assemble,
    column_sums,
    explicit_stability_bound,
    export_coo,
    to_dense,
    verify_structure,
)
from .solver import SolveInfo, SolverConfig, solve
from .stepper import (
    EvolutionReport,
    SchemeConfig,
    evolve,
    explicit_step,
    semi_implicit_step,
    steady_state_target,
)
from .synth import (
    ShadowSpec,
    boundary_band,
    edge_mask,
    gaussian_convolve,
    make_shadowed,
    random_texture,
    shadow_spec_from_json,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DataError",
    "DEFAULT_FLOOR",
    "DIRECTIONS",
    "DiffusivityField",
    "DiffusivityParams",
    "DriftField",
    "EvolutionReport",
    "GridSpec",
    "Image",
    "Mask",
    "MetricReport",
    "NumericalQualityWarning",
    "SchemeConfig",
    "ShadowSpec",
    "SolveInfo",
    "SolverConfig",
    "SpectrumReport",
    "StabilityError",
    "StencilOperator",
    "StructureReport",
    "apply",
    "assemble",
    "boundary_band",
    "canonical_drift",
    "cdr_drift",
    "column_sums",
    "dense_spectrum",
    "dense_update_matrix",
    "edge_g",
    "edge_mask",
    "energy",
    "evolve",
    "explicit_stability_bound",
    "explicit_step",
    "export_coo",
    "gaussian_convolve",
    "make_shadowed",
    "mass",
    "mean_value",
    "metric_report",
    "mse",
    "pointwise_g",
    "random_texture",
    "read_drift_dump",
    "semi_implicit_step",
    "shadow_drift",
    "shadow_spec_from_json",
    "solve",
    "ssim",
    "steady_state_target",
    "to_dense",
    "validate_positive",
    "verify_structure",
    "write_drift_dump",
]
