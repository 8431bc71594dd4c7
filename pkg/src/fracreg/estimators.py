"""scikit-learn transformers wrapping the fractional operators.

Each row of ``X`` is one scalar path sampled at ``n + 1`` uniform nodes of
``[0, t_end]``; ``transform`` returns an array of the same shape (or one
column for :class:`HolderExponent`).  Input must be real, as elsewhere in
scikit-learn; complex paths go through :mod:`fracreg.fracops` directly.
The transformers are stateless, so ``fit`` only validates parameters and
records ``n_features_in_``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .fracops import (
    MIN_INTERVALS,
    SampledPath,
    caputo_derivative,
    estimate_holder_exponent,
    frac_integral,
    rl_derivative,
)

__all__ = [
    "FractionalIntegral",
    "RiemannLiouvilleDerivative",
    "CaputoDerivative",
    "HolderExponent",
]


class _PathTransformer(TransformerMixin, BaseEstimator):
    def _check_params(self) -> None:
        if not (self.t_end > 0):
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")

    def fit(self, X, y=None):
        self._check_params()
        X = check_array(X, dtype=np.float64)
        if X.shape[1] < MIN_INTERVALS + 1:
            raise ValueError(f"need at least {MIN_INTERVALS + 1} samples per path")
        self.n_features_in_ = X.shape[1]
        return self

    def _paths(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        for row in X:
            yield SampledPath(self.t_end, row[:, None], tuple(self.exponents))

    def _map(self, X, op):
        return np.stack([op(p).values[:, 0].real for p in self._paths(X)])


class FractionalIntegral(_PathTransformer):
    """Row-wise ``B^{-alpha}`` (alpha > 0)."""

    def __init__(self, alpha: float = 0.5, t_end: float = 1.0, exponents=()):
        self.alpha = alpha
        self.t_end = t_end
        self.exponents = exponents

    def transform(self, X):
        return self._map(X, lambda p: frac_integral(p, self.alpha))


class RiemannLiouvilleDerivative(_PathTransformer):
    """Row-wise ``B^alpha`` (0 < alpha < 2)."""

    def __init__(self, alpha: float = 0.5, t_end: float = 1.0, exponents=()):
        self.alpha = alpha
        self.t_end = t_end
        self.exponents = exponents

    def transform(self, X):
        return self._map(X, lambda p: rl_derivative(p, self.alpha))


class CaputoDerivative(_PathTransformer):
    """Row-wise Caputo derivative (0 < alpha < 2)."""

    def __init__(self, alpha: float = 0.5, t_end: float = 1.0, exponents=()):
        self.alpha = alpha
        self.t_end = t_end
        self.exponents = exponents

    def transform(self, X):
        return self._map(X, lambda p: caputo_derivative(p, self.alpha))


class HolderExponent(_PathTransformer):
    """Fitted Hölder exponent of each row; ``nan`` for (near) constant rows."""

    exponents = ()

    def __init__(self, t_end: float = 1.0):
        self.t_end = t_end

    def transform(self, X):
        return np.array([[estimate_holder_exponent(p)] for p in self._paths(X)])
