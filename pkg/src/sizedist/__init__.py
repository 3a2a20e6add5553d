"""Heavy-tailed size-distribution toolkit.

Fits stretched-exponential, lognormal, lognormal-mixture, power-law, and
truncated-lognormal models to positive size data; selects tail cutoffs;
runs parametric-bootstrap goodness-of-fit tests and likelihood-based model
comparisons; and checks fitted laws against the stationary distributions of
simulated diffusions.
"""

from ._backend import COMPILED, backend_name
from .errors import (
    DegenerateMixtureError,
    DegenerateSampleError,
    InputError,
    InsufficientDataError,
    OptimizerError,
    SizedistError,
    StepSizeError,
    SupportError,
)
from .fitting import (
    Family,
    FitDiagnostics,
    FitResult,
    fit_lognormal,
    fit_mixture,
    fit_pareto,
    fit_stexp,
    fit_trunc_lognormal,
    log_likelihood,
    make_family,
    standard_errors,
)
from .gof import STATISTICS, GofReport, ad_stat, cm_stat, format_p, ks_stat, mc_pvalue
from .models import (
    SIZE_FAMILIES,
    ExpStretchedExponential,
    Lognormal,
    LognormalMixture,
    NormalMixture,
    NormalModel,
    Pareto,
    ShiftedExponential,
    StretchedExponential,
    TruncatedLognormal,
    TruncatedNormal,
)
from .pipeline import (
    DescriptiveStats,
    PipelineConfig,
    corank_plot_data,
    describe,
    load_csv,
    rank_plot_data,
    read_sizes,
    run_report,
    write_plot_files,
)
from .sample import Sample
from .sde import (
    SdeSpec,
    SimConfig,
    StationaryCheck,
    drift,
    score_identity_check,
    simulate,
    stationary_check,
)
from .selection import (
    CriteriaValues,
    SelectionReport,
    VuongResult,
    criteria,
    selection_report,
    vuong,
)
from .tail import TailScan, select_xmin

__version__ = "0.1.0"

__all__ = [
    "COMPILED",
    "CriteriaValues",
    "DegenerateMixtureError",
    "DegenerateSampleError",
    "DescriptiveStats",
    "ExpStretchedExponential",
    "Family",
    "FitDiagnostics",
    "FitResult",
    "GofReport",
    "InputError",
    "InsufficientDataError",
    "Lognormal",
    "LognormalMixture",
    "NormalMixture",
    "NormalModel",
    "OptimizerError",
    "Pareto",
    "PipelineConfig",
    "Sample",
    "SdeSpec",
    "SelectionReport",
    "ShiftedExponential",
    "SimConfig",
    "SizedistError",
    "StationaryCheck",
    "StepSizeError",
    "StretchedExponential",
    "SupportError",
    "SIZE_FAMILIES",
    "STATISTICS",
    "TailScan",
    "TruncatedLognormal",
    "TruncatedNormal",
    "VuongResult",
    "ad_stat",
    "backend_name",
    "cm_stat",
    "corank_plot_data",
    "criteria",
    "describe",
    "drift",
    "fit_lognormal",
    "fit_mixture",
    "fit_pareto",
    "fit_stexp",
    "fit_trunc_lognormal",
    "format_p",
    "ks_stat",
    "load_csv",
    "log_likelihood",
    "make_family",
    "mc_pvalue",
    "rank_plot_data",
    "read_sizes",
    "run_report",
    "score_identity_check",
    "select_xmin",
    "selection_report",
    "simulate",
    "standard_errors",
    "stationary_check",
    "vuong",
    "write_plot_files",
    "__version__",
]
