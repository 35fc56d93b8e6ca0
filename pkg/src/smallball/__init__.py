"""Exact and asymptotic L2 small-deviation probabilities of Gaussian processes.

The squared L2 norm of a centered Gaussian process expands as a weighted
chi-square sum over the eigenvalues of its covariance operator; everything
here is driven by that eigenvalue sequence.  `spectra` builds and queries
spectra (including a Nystrom eigensolver), `exactdist` computes the exact
CDF, `saddle` the saddle-point asymptotics, `slowvary` the closed-form
log-asymptotics for slowly varying counting functions, and `comparison`
the two-spectra comparison harness.  `cli` wraps it all for batch sweeps.
"""

from .errors import (
    DomainError,
    NotPSDError,
    OutOfRegimeError,
    PrecisionLimitError,
    SmallBallError,
    TruncationError,
    UnboundedCountError,
    UsageError,
    ValidationError,
)
from .spectra import (
    CountingFunction,
    GrowthCheck,
    KernelSpec,
    Spectrum,
    catalog,
    check_growth_condition,
    counting,
    cumulative_mass,
    kernel_from_json,
    nystrom_spectrum,
    spectrum_from_json,
    spectrum_to_json,
)
from .tails import PowerTail, StretchedExpTail
from .exactdist import CdfResult, cdf_inversion, cdf_monte_carlo, sample_norm_squared
from .saddle import (
    SaddleState,
    SmallBallEstimate,
    laplace_functionals,
    log_small_ball_estimate,
    small_ball_estimate,
    solve_saddle,
)
from .slowvary import (
    RcAlphaParams,
    SlowVaryingPhi,
    elliptic_K,
    elliptic_K_ratio,
    log_asymp_slowvary,
    psi,
    rc_alpha_counting,
    rc_alpha_log_asymp,
    solve_u_slowvary,
)
from .comparison import (
    ComparisonReport,
    ProductResult,
    exact_ratio_check,
    loglevel_ratio,
    ratio_product,
)

__version__ = "0.1.0"

__all__ = [
    "CdfResult",
    "ComparisonReport",
    "CountingFunction",
    "DomainError",
    "GrowthCheck",
    "KernelSpec",
    "NotPSDError",
    "OutOfRegimeError",
    "PowerTail",
    "PrecisionLimitError",
    "ProductResult",
    "RcAlphaParams",
    "SaddleState",
    "SlowVaryingPhi",
    "SmallBallEstimate",
    "SmallBallError",
    "Spectrum",
    "StretchedExpTail",
    "TruncationError",
    "UnboundedCountError",
    "UsageError",
    "ValidationError",
    "catalog",
    "cdf_inversion",
    "cdf_monte_carlo",
    "check_growth_condition",
    "counting",
    "cumulative_mass",
    "elliptic_K",
    "elliptic_K_ratio",
    "exact_ratio_check",
    "kernel_from_json",
    "laplace_functionals",
    "log_asymp_slowvary",
    "log_small_ball_estimate",
    "loglevel_ratio",
    "nystrom_spectrum",
    "psi",
    "ratio_product",
    "rc_alpha_counting",
    "rc_alpha_log_asymp",
    "sample_norm_squared",
    "small_ball_estimate",
    "solve_saddle",
    "solve_u_slowvary",
    "spectrum_from_json",
    "spectrum_to_json",
]
