import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracreg.errors import ConvergenceError, PoleError
from fracreg.specfun import (
    MlParams,
    beta_function,
    gamma,
    mittag_leffler,
    mittag_leffler_array,
    mittag_leffler_series,
)

# reference values: 3000-term series summed in 80-digit arithmetic (mpmath)
ML_REF = [
    (0.5, 0.5, -2, 0.053398230926744799),
    (1.5, 1.5, 1 + 1j, 1.6094759004019569 + 0.68850369305346066j),
    (0.8, 0.8, -1, 0.25574384475824187),
    (0.6, 1.0, -1, 0.4133273409431063),
    (1.5, 2.0, -1, 0.73748224790189471),
    (0.3, 1.0, -3, 0.21180263319643578),
    (1.9, 1.9, -10, -0.077252916353400792),
    (0.7, 1.0, -20, 0.017395698291603977),
    (1.2, 1.0, -30, -0.0061897755800389543),
]


@pytest.mark.parametrize("z, expected", [(1, 1.0), (5, 24.0), (0.5, math.sqrt(math.pi)), (1.7, 0.90863873285329044)])
def test_gamma_values(z, expected):
    assert abs(gamma(z) - expected) <= 1e-13 * abs(expected)


def test_gamma_complex_and_negative():
    assert abs(gamma(0.3 + 2j) - (0.057465337569588033 - 0.074984912582646138j)) < 1e-14
    assert abs(gamma(-0.5) - (-2 * math.sqrt(math.pi))) < 1e-13
    with pytest.raises(PoleError):
        gamma(-2)


def test_gamma_array():
    z = np.array([1.0, 2.0, 3.0, 4.5])
    ref = np.array([math.gamma(x) for x in z])
    assert np.allclose(gamma(z), ref, rtol=1e-13)


def test_gamma_recurrence_grid():
    xs, ys = np.meshgrid(np.linspace(0.1, 20, 10), np.linspace(-10, 10, 10))
    for z in (xs + 1j * ys).ravel():
        g1 = gamma(z + 1)
        assert abs(g1 - z * gamma(z)) <= 1e-10 * abs(g1)


@given(st.floats(0.01, 0.99), st.floats(-3, 3))
def test_gamma_reflection(x, y):
    z = complex(x, y)
    val = gamma(z) * gamma(1 - z) * cmath.sin(math.pi * z) / math.pi
    assert abs(val - 1) <= 1e-10


def test_beta_function():
    assert abs(beta_function(2, 3) - 1 / 12) < 1e-15
    assert abs(beta_function(0.5, 0.5) - math.pi) < 1e-13


def test_ml_series_examples():
    assert abs(mittag_leffler_series(MlParams(1, 1), 1) - math.e) < 1e-14
    assert abs(mittag_leffler_series(MlParams(0.7, 0.7), 0) - 1 / math.gamma(0.7)) < 1e-15
    assert abs(mittag_leffler_series(MlParams(2, 1), 4) - 3.7621956910836315) < 1e-14


@pytest.mark.parametrize("a, b, z, ref", ML_REF)
def test_ml_reference_values(a, b, z, ref):
    p = MlParams(a, b)
    assert abs(mittag_leffler(p, z) - ref) <= 1e-10 * max(1.0, abs(ref))
    assert abs(mittag_leffler(p, z, method="contour") - ref) <= 1e-10 * max(1.0, abs(ref))


def test_ml_exponential_cancellation():
    v = mittag_leffler(MlParams(1, 1), -50)
    assert abs(v - math.exp(-50)) <= 1e-12 * math.exp(-50)


def test_ml_contour_vs_series_examples():
    for a, z in [(0.5, -2), (1.5, 1 + 1j)]:
        p = MlParams(a, a)
        assert abs(mittag_leffler(p, z, method="contour") - mittag_leffler_series(p, z)) <= 1e-8


def test_ml_series_agreement_full_grid():
    for a in (0.4, 0.7, 1.0, 1.3, 1.6, 1.9):
        p = MlParams(a, a)
        for z in np.linspace(-10, 10, 21):
            s = mittag_leffler_series(p, z)
            c = mittag_leffler(p, z, method="contour")
            assert abs(s - c) <= 1e-8 * max(1.0, abs(s)), (a, z)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 1.9), st.floats(0.2, 2.0), st.floats(-5, 5), st.floats(-5, 5))
def test_ml_shift_identity(a, b, x, y):
    z = complex(x, y)
    lhs = mittag_leffler(MlParams(a, b), z)
    rhs = 1 / math.gamma(b) + z * mittag_leffler(MlParams(a, a + b), z)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_ml_array_matches_scalar():
    z = np.concatenate([np.linspace(-40, 8, 60), 3j * np.linspace(-4, 4, 9)])
    for a, b in [(0.5, 1.0), (0.8, 0.8), (1.5, 2.0), (1.0, 1.0)]:
        vec = mittag_leffler_array(a, b, z)
        ref = np.array([mittag_leffler(MlParams(a, b), w) for w in z])
        assert np.allclose(vec, ref, rtol=1e-12, atol=1e-14)


def test_ml_completely_monotone_on_negative_axis():
    # E_{a,1}(-x) decreases from 1 towards 0 for 0 < a < 1
    x = np.linspace(0, 50, 101)
    v = mittag_leffler_array(0.6, 1.0, -x).real
    assert v[0] == pytest.approx(1.0)
    assert np.all(np.diff(v) < 0) and np.all(v > 0)


def test_ml_params_validation():
    with pytest.raises(ValueError):
        MlParams(0, 1)
    with pytest.raises(ValueError):
        MlParams(0.5, -1)
    with pytest.raises(ValueError):
        mittag_leffler(MlParams(2.5, 1), 100.0, method="contour")


def test_ml_series_nonconvergence():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ConvergenceError):
            mittag_leffler_series(MlParams(0.05, 1), 60.0, cap=200)


def test_slow_series_inside_switch_radius():
    # at alpha = 0.2 the terms 4^k / Gamma(0.2k + 1) do not decay within the term cap
    z = 4j
    v = mittag_leffler(MlParams(0.203125, 1.0), z)
    rhs = 1 + z * mittag_leffler(MlParams(0.203125, 1.203125), z)
    assert abs(v - rhs) <= 1e-10 * max(1.0, abs(v))
    arr = mittag_leffler_array(0.203125, 1.0, np.array([z, 0.5]))
    assert abs(arr[0] - v) <= 1e-12 * abs(v)
    assert abs(arr[1] - mittag_leffler(MlParams(0.203125, 1.0), 0.5)) <= 1e-13
