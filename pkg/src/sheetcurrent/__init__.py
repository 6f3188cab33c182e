"""Numerics for two-parameter stochastic currents over the Brownian sheet."""

__version__ = "0.1.0"

from .chaos import (
    delta_coeff,
    delta_coeff_fourier,
    delta_coeff_stable,
    permutation_average,
    symmetrize_partial,
    tensor_multiple_integral,
    truncated_delta,
)
from .current import (
    approx_error_fourier_exact,
    fourier_current,
    fourier_second_moment_exact,
    multi_fourier_current,
    riemann_current,
    sobolev_norm_scan,
)
from .errors import (
    ConfigError,
    DomainError,
    InvalidGridError,
    PreconditionError,
    SheetCurrentError,
    ToleranceError,
)
from .hermite import bound_constant, gaussian_kernel, hermite_gaussian_identity_residual
from .norms import SeriesParams, SeriesResult, WeightConvention, approximation_error_norm, per_term_bound_check, watanabe_norm_xi
from .quadrature import quad_2d
from .rng import EstimatorResult
from .sheet import GridSpec, SheetPath, simulate_sheet

__all__ = [
    "__version__",
    "ConfigError",
    "DomainError",
    "EstimatorResult",
    "GridSpec",
    "InvalidGridError",
    "PreconditionError",
    "SeriesParams",
    "SeriesResult",
    "SheetCurrentError",
    "SheetPath",
    "ToleranceError",
    "WeightConvention",
    "approx_error_fourier_exact",
    "approximation_error_norm",
    "bound_constant",
    "delta_coeff",
    "delta_coeff_fourier",
    "delta_coeff_stable",
    "fourier_current",
    "fourier_second_moment_exact",
    "gaussian_kernel",
    "hermite_gaussian_identity_residual",
    "multi_fourier_current",
    "per_term_bound_check",
    "permutation_average",
    "quad_2d",
    "riemann_current",
    "simulate_sheet",
    "sobolev_norm_scan",
    "symmetrize_partial",
    "tensor_multiple_integral",
    "truncated_delta",
    "watanabe_norm_xi",
]
