"""Fractional-order abstract Cauchy problems with sectorial matrix operators.

Mittag-Leffler functions, keyhole contour quadrature, fractional integrals
and derivatives of sampled paths, sectorial operator diagnostics, and a
contour-integral solver for the abstract, Riemann-Liouville and Caputo
problem kinds.
"""

from .contour import ContourSpec, QuadratureConfig, QuadratureRule, build_keyhole, laplace_inversion, quadrature
from .errors import (
    CompatibilityWarning,
    ContourDomainError,
    ContourFallbackWarning,
    ConvergenceError,
    FracRegError,
    NoiseAmplificationWarning,
    NonNormalError,
    PoleError,
    QuadratureError,
    SectorError,
    SingularityError,
)
from .fracops import (
    SampledPath,
    caputo_derivative,
    estimate_holder_exponent,
    extract_initial_coeffs,
    frac_integral,
    holder_seminorm,
    rl_derivative,
    scalar_resolvent,
    zygmund_seminorm,
)
from .opalgebra import MatrixOperator, eig_oracle, interp_norm, resolve, sectoriality_scan
from .solver import (
    ProblemSpec,
    SolutionBundle,
    compatibility_report,
    propagator_H,
    propagator_S,
    regularity_verifier,
    solve,
)
from .specfun import MlParams, beta_function, gamma, mittag_leffler, mittag_leffler_array, mittag_leffler_series

__version__ = "0.1.0"

__all__ = [
    "CompatibilityWarning",
    "ContourDomainError",
    "ContourFallbackWarning",
    "ContourSpec",
    "ConvergenceError",
    "FracRegError",
    "MatrixOperator",
    "MlParams",
    "NoiseAmplificationWarning",
    "NonNormalError",
    "PoleError",
    "ProblemSpec",
    "QuadratureConfig",
    "QuadratureError",
    "QuadratureRule",
    "SampledPath",
    "SectorError",
    "SingularityError",
    "SolutionBundle",
    "beta_function",
    "build_keyhole",
    "caputo_derivative",
    "compatibility_report",
    "eig_oracle",
    "estimate_holder_exponent",
    "extract_initial_coeffs",
    "frac_integral",
    "gamma",
    "holder_seminorm",
    "interp_norm",
    "laplace_inversion",
    "mittag_leffler",
    "mittag_leffler_array",
    "mittag_leffler_series",
    "propagator_H",
    "propagator_S",
    "quadrature",
    "regularity_verifier",
    "resolve",
    "rl_derivative",
    "scalar_resolvent",
    "sectoriality_scan",
    "solve",
    "zygmund_seminorm",
]
