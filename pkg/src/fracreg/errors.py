"""Exception and warning types shared across the package."""

from __future__ import annotations


class FracRegError(Exception):
    """Base class for all package errors."""


class PoleError(FracRegError, ValueError):
    """Evaluation at a pole of a meromorphic function."""


class ConvergenceError(FracRegError, ArithmeticError):
    """A series or iteration hit its cap before meeting its tolerance."""


class ContourDomainError(FracRegError, ValueError):
    """Contour geometry is invalid or incompatible with the integrand."""


class QuadratureError(FracRegError, RuntimeError):
    """A quadrature rule could not be built within resource limits."""


class SingularityError(FracRegError, ArithmeticError):
    """A shifted linear system is singular to working precision."""


class NonNormalError(FracRegError, ValueError):
    """An operator is not normal where normality is required."""


class SectorError(FracRegError, ValueError):
    """Problem data violates a sector condition."""


class NoiseAmplificationWarning(UserWarning):
    """Finite differencing amplified high-frequency content."""


class ContourFallbackWarning(UserWarning):
    """The contour route was abandoned in favour of the series."""


class CompatibilityWarning(UserWarning):
    """Problem data fails a compatibility condition."""
