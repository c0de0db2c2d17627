"""Sensitivity analysis for matched-pair studies with binary treatment and outcome."""

__version__ = "0.1.0"

from .attrib import (
    AttributableConfig,
    AttributableResult,
    attributable_interval,
    deviate_average_case,
    deviate_no_bias,
    deviate_worst_case,
)
from .calibrate import IntermittencyCalibration, gamma_prime_from_intermittency
from .core import (
    Calibration,
    ContingencyTable2x2,
    DiscordantSummary,
    GammaSpec,
    ProbabilityVector,
    PValueBounds,
    SensitivityError,
    summarize,
)
from .dist import (
    binom_upper_tail,
    normal_cdf,
    normal_quantile,
    poisson_binomial_pmf,
    poisson_binomial_upper_tail,
)
from .mcnemar import (
    Method,
    SensResult,
    SensStatus,
    gamma_sens_search,
    pvalue_bounds,
    trimmed_gamma_search,
)

__all__ = [
    "AttributableConfig",
    "AttributableResult",
    "Calibration",
    "ContingencyTable2x2",
    "DiscordantSummary",
    "GammaSpec",
    "IntermittencyCalibration",
    "Method",
    "PValueBounds",
    "ProbabilityVector",
    "SensResult",
    "SensStatus",
    "SensitivityError",
    "attributable_interval",
    "binom_upper_tail",
    "deviate_average_case",
    "deviate_no_bias",
    "deviate_worst_case",
    "gamma_prime_from_intermittency",
    "gamma_sens_search",
    "normal_cdf",
    "normal_quantile",
    "poisson_binomial_pmf",
    "poisson_binomial_upper_tail",
    "pvalue_bounds",
    "summarize",
    "trimmed_gamma_search",
]
