"""Tail bounds for weighted sums of exponential, gamma, and Laplace variables,
with exact oracles and Monte Carlo cross-checks."""

from .bounds import (
    MOMENT_CONSTANT_PAPER,
    MOMENT_CONSTANT_PROOF,
    BoundKind,
    BoundValue,
    generic_lower,
    generic_upper,
    janson_lower,
    janson_upper,
    laplace_lower,
    laplace_upper,
    moment_bounds,
    pz_bound,
    r_function,
    r_infimum_numeric,
    s_inequality_upper,
)
from .core import (
    Distribution,
    InvalidInputError,
    LawKind,
    MixtureUnavailableError,
    NumericFailureError,
    UnsupportedLawError,
    WeightStats,
    WeightVector,
    as_weights,
    parse_weights,
    weight_stats,
)
from .harness import (
    PropertyResult,
    PropertySuiteReport,
    SandwichConfig,
    SandwichRow,
    property_suite,
    random_instances,
    rows_to_csv,
    rows_to_json,
    sandwich_report,
)
from .legendre import (
    LegendreResult,
    chernoff_tilt,
    log_mgf,
    log_mgf_prime,
    rate_function,
    sum_log_mgf,
    sum_log_mgf_prime,
)
from .montecarlo import MCEstimate, is_tail, mc_tail, sample_sum
from .oracle import (
    ExpMixture,
    MixtureSide,
    MixtureTerm,
    cf_tail_inversion,
    exact_tail,
    hypoexp_mixture,
    hypoexp_tail,
    laplace_abs_moment,
    laplace_mixture,
    laplace_tail,
    p_ge_mean,
)
from .special import (
    gamma_upper_tail,
    gaussian_tail,
    gaussian_tail_lower,
    h_closed,
    h_sup,
    log_gamma_upper_tail,
)

__version__ = "0.1.0"

__all__ = [
    "BoundKind",
    "BoundValue",
    "Distribution",
    "ExpMixture",
    "InvalidInputError",
    "LawKind",
    "LegendreResult",
    "MCEstimate",
    "MixtureSide",
    "MixtureTerm",
    "MixtureUnavailableError",
    "MOMENT_CONSTANT_PAPER",
    "MOMENT_CONSTANT_PROOF",
    "NumericFailureError",
    "PropertyResult",
    "PropertySuiteReport",
    "SandwichConfig",
    "SandwichRow",
    "UnsupportedLawError",
    "WeightStats",
    "WeightVector",
    "as_weights",
    "cf_tail_inversion",
    "chernoff_tilt",
    "exact_tail",
    "gamma_upper_tail",
    "gaussian_tail",
    "gaussian_tail_lower",
    "generic_lower",
    "generic_upper",
    "h_closed",
    "h_sup",
    "hypoexp_mixture",
    "hypoexp_tail",
    "is_tail",
    "janson_lower",
    "janson_upper",
    "laplace_abs_moment",
    "laplace_lower",
    "laplace_mixture",
    "laplace_tail",
    "laplace_upper",
    "log_gamma_upper_tail",
    "log_mgf",
    "log_mgf_prime",
    "mc_tail",
    "moment_bounds",
    "p_ge_mean",
    "parse_weights",
    "property_suite",
    "pz_bound",
    "r_function",
    "r_infimum_numeric",
    "random_instances",
    "rate_function",
    "rows_to_csv",
    "rows_to_json",
    "sample_sum",
    "sandwich_report",
    "s_inequality_upper",
    "sum_log_mgf",
    "sum_log_mgf_prime",
    "weight_stats",
]
