import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline

from fracreg.estimators import (
    CaputoDerivative,
    FractionalIntegral,
    HolderExponent,
    RiemannLiouvilleDerivative,
)


def grid(n=128, t_end=1.0):
    return np.linspace(0, t_end, n + 1)


def test_params_and_clone():
    est = FractionalIntegral(alpha=0.3, t_end=2.0)
    assert est.get_params() == {"alpha": 0.3, "t_end": 2.0, "exponents": ()}
    twin = clone(est).set_params(alpha=0.7)
    assert twin.alpha == 0.7 and est.alpha == 0.3
    assert HolderExponent().get_params() == {"t_end": 1.0}


def test_integral_of_ones():
    t = grid()
    X = np.ones((3, t.size))
    out = FractionalIntegral(alpha=0.5).fit_transform(X)
    assert out.shape == X.shape and np.isrealobj(out)
    assert np.allclose(out, 2 * np.sqrt(t / math.pi), atol=1e-13)


def test_complex_rows_rejected():
    with pytest.raises(ValueError):
        FractionalIntegral().fit(np.ones((1, 65)) * (1 + 1j))


def test_integral_then_derivative_round_trip():
    t = grid(1024)
    X = np.stack([np.cos(2 * t) + t, np.exp(-t)])
    pipe = make_pipeline(FractionalIntegral(alpha=0.6), RiemannLiouvilleDerivative(alpha=0.6))
    back = pipe.fit_transform(X)
    assert np.max(np.abs(back - X)[:, 100:]) <= 1e-4


def test_caputo_kills_constants():
    X = np.full((2, 129), 3.0)
    assert np.max(np.abs(CaputoDerivative(alpha=0.4).fit_transform(X))) <= 1e-12


def test_annotated_exponents_are_used():
    t = grid(64)
    X = (t**0.3)[None, :]
    out = FractionalIntegral(alpha=0.7, exponents=(0.3,)).fit_transform(X)
    ref = math.gamma(1.3) / math.gamma(2.0) * t
    assert np.allclose(out[0], ref, atol=1e-12)


def test_holder_exponent():
    t = grid(1024)
    out = HolderExponent().fit_transform(np.stack([t**0.3, t, 2 + 0 * t]))
    assert out.shape == (3, 1)
    assert out[0, 0] == pytest.approx(0.3, abs=0.05)
    assert out[1, 0] >= 0.95
    assert math.isnan(out[2, 0])


def test_validation():
    with pytest.raises(ValueError):
        FractionalIntegral(t_end=0.0).fit(np.ones((1, 65)))
    with pytest.raises(ValueError):
        FractionalIntegral().fit(np.ones((1, 3)))
    est = FractionalIntegral().fit(np.ones((1, 65)))
    with pytest.raises(ValueError):
        est.transform(np.ones((1, 33)))
    with pytest.raises(Exception):
        FractionalIntegral().transform(np.ones((1, 65)))
