"""Bivariate Zenga inequality surfaces, the vector-valued Zenga curve (VBZC) and its estimators."""

from .errors import (
    CapabilityError,
    ConditioningEmptyError,
    ConditioningError,
    ConvergenceError,
    CostWarning,
    DegenerateDenominatorError,
    DomainError,
    EmptySampleError,
    InversionError,
    UnboundedSupportError,
    ValidationError,
    ZengaError,
)
from .numerics import (
    DEFAULT_TOL,
    EPS_CLIP,
    IntervalRect,
    QuantilePoint,
    QuantileVector,
    Tolerance,
    clip_level,
    integrate_1d,
    integrate_2d,
    integrate_levels,
    integrate_nd,
    invert_monotone,
)
from .grid import Measure, Provenance, SurfaceGrid, SurfaceSlice
from .models import (
    BivariateQuantileModel,
    BivariateSample,
    DegenerateModel,
    DensityModel,
    FunctionalModel,
    LognormalModel,
    LognormalParams,
    ParetoShifted,
    ParetoUnit,
    PowerModel,
    ProductQuantileModel,
    ScaledModel,
    UnivariateModel,
    lognormal_sample,
)
from .surfaces import (
    evaluate_surface,
    lorenz_surface,
    monotonicity_diagnostic,
    partial_product_means,
    synthetic_index_I,
    zenga_A_xspace,
    zenga_I,
    zenga_I_from_lorenz,
    zenga_index_xi,
    zenga_Z,
)
from .vbzc import (
    Direction,
    VbzcPoint,
    directional_partials,
    pareto_vbzc_printed,
    printed_discrepancy,
    reconstruct_conditional_quantile,
    vbzc_components,
)
from .estimator import (
    empirical_quantile,
    estimate_lower_partial_mean,
    estimate_surface,
    estimate_vbzc,
    surface_slice,
    tail_subsample,
)
from .simulation import McConfig, McSummary, derive_seed, qualitative_check, run_replications
from .cli_io import DatasetSpec, RunConfig, emit_surface, load_dataset, load_surface, rescale_unit

__version__ = "0.1.0"
