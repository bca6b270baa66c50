"""Reflection-coefficient modeling for the 300-400 GHz band.

A rough-slab interference model with Lorentz/Drude dispersion, a
sub-band fitting pipeline that regresses the dispersion parameters'
log-linear frequency trends, a built-in fitted material database, and
evaluation/comparison utilities. Plotting lives in thzreflect.report and
the command line in thzreflect.cli; neither is imported here, so the
numeric core stays lightweight.
"""

from .data import (
    DataError,
    Dataset,
    MaterialRecord,
    MeasurementSample,
    SweepRecord,
    get_material,
    linear_grid,
    load_samples,
    load_sweeps,
    material_names,
    ratio_reflection,
    save_samples,
    stratified_split,
    synthesize_dataset,
)
from .evaluate import (
    ComparisonReport,
    ErrorCdf,
    ModelEvaluation,
    abs_error_cdf,
    compare_models,
    confidence_bound,
    rmse,
)
from .fitting import (
    FitError,
    FitResult,
    LMConfig,
    SingularNormalEquationsError,
    levenberg_marquardt,
    numerical_jacobian,
)
from .physics import (
    C_M_PER_S,
    EPS0_F_PER_M,
    EmpiricalTrend,
    MaterialClass,
    TrendParams,
    empirical_slab_reflection,
    fresnel_te,
    permittivity_drude,
    permittivity_empirical,
    permittivity_lorentz,
    phase_thickness,
    predict_reflection,
    rough_slab_reflection,
    roughness_factor,
    slab_interference_magnitude,
    trend_to_params,
)
from .specfun import bessel_i0_scaled, complex_sqrt_lossy
from .subband import (
    BandFit,
    EmpiricalFitResult,
    InsufficientBandsError,
    SubBand,
    TrendFitConfig,
    TrendFitResult,
    UnderConstrainedBandError,
    fit_band,
    fit_empirical_trend,
    fit_trend,
    partition_bands,
    trend_regression,
    weighted_initial_guess,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "C_M_PER_S",
    "EPS0_F_PER_M",
    "MaterialClass",
    "TrendParams",
    "EmpiricalTrend",
    "bessel_i0_scaled",
    "complex_sqrt_lossy",
    "permittivity_empirical",
    "permittivity_lorentz",
    "permittivity_drude",
    "fresnel_te",
    "phase_thickness",
    "slab_interference_magnitude",
    "roughness_factor",
    "trend_to_params",
    "rough_slab_reflection",
    "empirical_slab_reflection",
    "predict_reflection",
    "FitError",
    "SingularNormalEquationsError",
    "LMConfig",
    "FitResult",
    "numerical_jacobian",
    "levenberg_marquardt",
    "UnderConstrainedBandError",
    "InsufficientBandsError",
    "SubBand",
    "BandFit",
    "TrendFitConfig",
    "TrendFitResult",
    "EmpiricalFitResult",
    "partition_bands",
    "weighted_initial_guess",
    "fit_band",
    "trend_regression",
    "fit_trend",
    "fit_empirical_trend",
    "DataError",
    "SweepRecord",
    "MeasurementSample",
    "Dataset",
    "MaterialRecord",
    "linear_grid",
    "ratio_reflection",
    "stratified_split",
    "material_names",
    "get_material",
    "synthesize_dataset",
    "load_samples",
    "load_sweeps",
    "save_samples",
    "ErrorCdf",
    "ModelEvaluation",
    "ComparisonReport",
    "rmse",
    "abs_error_cdf",
    "confidence_bound",
    "compare_models",
]
