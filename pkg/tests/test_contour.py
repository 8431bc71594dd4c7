import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracreg.contour import (
    QuadratureConfig,
    band_quadrature,
    build_keyhole,
    laplace_inversion,
    quadrature,
)
from fracreg.errors import ContourDomainError, QuadratureError
from fracreg.specfun import MlParams, mittag_leffler_series


def test_keyhole_anchor_and_symmetry():
    spec = build_keyhole(3 * math.pi / 4, 1.0)
    assert spec.point(0.0) == pytest.approx(1.0)
    s = np.linspace(0.1, 10, 50)
    assert np.allclose(spec.point(s), np.conj(spec.point(-s)))


def test_keyhole_corner_and_ray_direction():
    spec = build_keyhole(0.6 * math.pi, 2.0)
    s0 = spec.arc_half_length
    assert spec.point(s0) == pytest.approx(2.0 * complex(math.cos(0.6 * math.pi), math.sin(0.6 * math.pi)))
    # the upper ray runs outward (towards infinity) as s grows
    assert abs(spec.point(s0 + 5)) == pytest.approx(7.0)


def test_shifted_nodes_keep_distance():
    spec = build_keyhole(0.6 * math.pi, 2.0, shift=1.0)
    rule = quadrature(spec, 1.0)
    assert np.all(np.abs(rule.mu - 1.0) >= 2.0 - 1e-12)


def test_keyhole_rejects_bad_angle():
    for theta in (0.4 * math.pi, math.pi, 1.2 * math.pi):
        with pytest.raises(ContourDomainError):
            build_keyhole(theta, 1.0)
    with pytest.raises(ContourDomainError):
        build_keyhole(0.7 * math.pi, 0.0)


def test_truncation_point():
    spec = build_keyhole(0.75 * math.pi, 1.0)
    rule = quadrature(spec, 1.0, tail_tol=1e-16)
    end = spec.point(rule.truncation_param)
    assert end.real <= math.log(1e-16) + spec.radius + 1e-9


def test_conjugate_symmetric_rule():
    rule = quadrature(build_keyhole(0.7 * math.pi, 1.5), 2.0)
    mu, w = rule.mu, rule.weights
    order = np.argsort(mu.imag)
    mu, w = mu[order], w[order]
    assert np.allclose(mu, np.conj(mu[::-1]))
    # conjugating the path flips dmu and 1/(2 pi i) together
    assert np.allclose(w, np.conj(w[::-1]))


def test_heaviside():
    spec = build_keyhole(0.7 * math.pi, 1.0)
    assert abs(laplace_inversion(lambda lam: 1 / lam, spec, 1.0) - 1.0) <= 1e-10


def test_refinement_changes_heaviside_little():
    spec = build_keyhole(0.7 * math.pi, 1.0)
    a = laplace_inversion(lambda lam: 1 / lam, spec, 1.0, nodes_per_unit=12)
    b = laplace_inversion(lambda lam: 1 / lam, spec, 1.0, nodes_per_unit=24)
    assert abs(a - b) <= 1e-10


def test_power_inversion():
    d = 0.7
    F = lambda lam: math.gamma(d + 1) * lam ** (-d - 1)  # noqa: E731
    v = laplace_inversion(F, build_keyhole(0.75 * math.pi, 1.0), 0.5)
    assert abs(v - 0.5**0.7) <= 1e-10


def test_ml_inversion():
    ref = mittag_leffler_series(MlParams(0.8, 0.8), -1.0)
    v = laplace_inversion(lambda lam: 1 / (lam**0.8 + 1), build_keyhole(0.75 * math.pi, 2.0), 1.0)
    assert abs(v - ref) <= 1e-10


def test_vector_valued_inversion():
    F = lambda lam: np.stack([1 / lam, 1 / lam**2], axis=-1)  # noqa: E731
    v = laplace_inversion(F, build_keyhole(0.7 * math.pi, 1.0), 2.0)
    assert np.allclose(v, [1.0, 2.0], atol=1e-10)


def test_real_output_for_conjugate_symmetric_transform():
    v = laplace_inversion(lambda lam: 1 / (lam**1.3 + 2), build_keyhole(0.7 * math.pi, 3.0), 0.8)
    assert abs(v.imag) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.floats(0.55, 0.95), st.floats(0.5, 4.0), st.floats(0.05, 5.0))
def test_contour_independence(frac, radius, t):
    # 1/(lam^0.6 + 1) has no poles on the principal sheet, so any keyhole works
    F = lambda lam: 1 / (lam**0.6 + 1)  # noqa: E731
    a = laplace_inversion(F, build_keyhole(frac * math.pi, radius), t)
    b = laplace_inversion(F, build_keyhole(0.75 * math.pi, 1.0), t)
    assert abs(a - b) <= 1e-8


def test_self_convergence_monotone():
    F = lambda lam: 1 / (lam**0.5 + 1)  # noqa: E731
    spec = build_keyhole(0.7 * math.pi, 3.0)
    vals = [laplace_inversion(F, spec, 1.0, nodes_per_unit=n) for n in (2, 4, 8, 16)]
    diffs = [abs(vals[i + 1] - vals[i]) for i in range(3)]
    assert diffs[1] < diffs[0] and diffs[2] < diffs[1]


def test_small_t_node_count_bounded():
    spec = build_keyhole(0.7 * math.pi, 1.0)
    counts = []
    for t in (1.0, 1e-2, 1e-4):
        v = laplace_inversion(lambda lam: 1 / lam**1.5, spec, t)
        assert abs(v - t**0.5 / math.gamma(1.5)) <= 1e-10 * t**0.5
        counts.append(len(quadrature(spec.with_radius(max(1.0, 3.0 / t)), t)))
    assert max(counts) <= 2 * min(counts)


def test_band_rule_covers_range():
    spec = build_keyhole(0.7 * math.pi, 4.0)
    rule = band_quadrature(spec, 0.25, 1.0)
    for t in (0.25, 0.5, 1.0):
        v = rule.integrate(np.exp(rule.mu * t) / rule.mu**2)
        assert abs(v - t) <= 1e-10


def test_node_budget():
    with pytest.raises(QuadratureError):
        quadrature(build_keyhole(0.7 * math.pi, 1.0), 1.0, config=QuadratureConfig(max_nodes=10))


def test_bad_time():
    with pytest.raises(ContourDomainError):
        laplace_inversion(lambda lam: 1 / lam, build_keyhole(0.7 * math.pi, 1.0), 0.0)
