"""Keyhole contours and trapezoid quadrature for Bromwich-type integrals.

A keyhole contour :math:`\\Gamma(\\theta, r)` consists of the two rays
:math:`\\{|\\arg \\mu| = \\theta, |\\mu| \\ge r\\}` joined by the arc
:math:`\\{|\\arg \\mu| \\le \\theta, |\\mu| = r\\}`, optionally translated by a
complex ``shift``.  It is traversed from :math:`\\infty e^{-i\\theta}` to
:math:`\\infty e^{i\\theta}`, so singularities of the integrand sit on its left.

The quadrature is the trapezoid rule in the arclength parameter ``s``.  The
arc/ray junctions are corners of the path, so the rule carries Gregory end
corrections there; away from the corners it is the plain trapezoid rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ContourDomainError, QuadratureError

__all__ = [
    "ContourSpec",
    "QuadratureConfig",
    "QuadratureRule",
    "DEFAULT_QUADRATURE",
    "build_keyhole",
    "quadrature",
    "band_quadrature",
    "laplace_inversion",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Tunable defaults for :func:`quadrature`.

    ``nodes_per_unit`` counts nodes per unit of arclength measured in the
    natural length scale ``min(radius, 1/t)`` of the integrand.
    ``radius_scale`` sets the smallest arc radius used by
    :func:`laplace_inversion`, in units of ``1/t``.
    """

    nodes_per_unit: float = 12.0
    tail_tol: float = 1e-16
    correction_order: int = 12
    radius_scale: float = 3.0
    max_nodes: int = 1_000_000


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class ContourSpec:
    """Keyhole contour with ray angle ``theta``, arc radius and translation."""

    theta: float
    radius: float
    shift: complex = 0j

    def __post_init__(self) -> None:
        if not (math.pi / 2 < self.theta < math.pi):
            raise ContourDomainError(
                f"theta must lie in (pi/2, pi), got {self.theta!r}"
            )
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ContourDomainError(f"radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "shift", complex(self.shift))

    @property
    def arc_half_length(self) -> float:
        """Arclength ``s0`` from the apex to either corner."""
        return self.radius * self.theta

    def point(self, s):
        """Return ``mu(s)`` for arclength ``s`` (scalar or array)."""
        s = np.asarray(s, dtype=float)
        s0 = self.arc_half_length
        r = self.radius
        on_arc = np.abs(s) <= s0
        arc = r * np.exp(1j * np.clip(s, -s0, s0) / r)
        sign = np.sign(s)
        ray = (r + np.abs(s) - s0) * np.exp(1j * sign * self.theta)
        return self.shift + np.where(on_arc, arc, ray)

    def tangent(self, s):
        """Return ``dmu/ds``; one-sided from the arc at the corners."""
        s = np.asarray(s, dtype=float)
        s0 = self.arc_half_length
        on_arc = np.abs(s) <= s0
        arc = 1j * np.exp(1j * np.clip(s, -s0, s0) / self.radius)
        sign = np.sign(s)
        ray = sign * np.exp(1j * sign * self.theta)
        return np.where(on_arc, arc, ray)

    def with_radius(self, radius: float) -> "ContourSpec":
        return replace(self, radius=float(radius))

    def distance_to(self, mu: complex) -> float:
        """Euclidean distance from ``mu`` to the (untruncated) contour."""
        w = complex(mu) - self.shift
        rho, ang = abs(w), abs(math.atan2(w.imag, w.real))
        d_arc = abs(rho - self.radius) if ang <= self.theta else math.inf
        best = d_arc
        for sgn in (1.0, -1.0):
            e = complex(math.cos(self.theta), sgn * math.sin(self.theta))
            proj = (w * e.conjugate()).real
            proj = max(proj, self.radius)
            best = min(best, abs(w - proj * e))
        # the arc endpoints are covered by the ray projections
        return best

    def on_right(self, mu: complex) -> bool:
        """True if ``mu`` lies to the right of the contour (outside the keyhole)."""
        w = complex(mu) - self.shift
        return abs(w) > self.radius and abs(math.atan2(w.imag, w.real)) < self.theta


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes ``mu`` and weights (with ``dmu/ds`` and ``1/(2 pi i)`` folded in)."""

    mu: np.ndarray
    weights: np.ndarray
    truncation_param: float
    step: float

    def __post_init__(self) -> None:
        self.mu.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def nodes(self) -> list[tuple[complex, complex]]:
        return list(zip(self.mu.tolist(), self.weights.tolist()))

    def __len__(self) -> int:
        return self.mu.size

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Sum ``weights * values`` over the node axis (axis 0)."""
        values = np.asarray(values)
        w = self.weights.reshape((-1,) + (1,) * (values.ndim - 1))
        return np.sum(w * values, axis=0)


def build_keyhole(theta: float, radius: float, shift: complex = 0j) -> ContourSpec:
    """Construct a keyhole contour; raises on ``theta`` outside ``(pi/2, pi)``."""
    return ContourSpec(float(theta), float(radius), complex(shift))


@lru_cache(maxsize=None)
def _gregory_coefficients(order: int) -> np.ndarray:
    # Endpoint corrections c_j with sum_j c_j j^p equal to the left-end
    # Euler-Maclaurin defect of the trapezoid rule for x^p, p < order.
    from scipy.special import bernoulli

    b = bernoulli(order + 1)
    j = np.arange(order, dtype=float)
    vander = np.vander(j, order, increasing=True).T
    vander[0, 0] = 1.0
    rhs = np.zeros(order)
    for p in range(1, order, 2):
        rhs[p] = b[p + 1] / (p + 1)
    return np.linalg.solve(vander, rhs)


def quadrature(
    spec: ContourSpec,
    t: float,
    nodes_per_unit: float | None = None,
    tail_tol: float | None = None,
    *,
    config: QuadratureConfig = DEFAULT_QUADRATURE,
) -> QuadratureRule:
    """Trapezoid rule in arclength for :math:`\\frac{1}{2\\pi i}\\int e^{\\mu t} F(\\mu)\\,d\\mu`.

    The rays are cut at the first parameter where
    :math:`|e^{\\mu(s) t}| \\le \\text{tail\\_tol}\\,|e^{\\mu(0) t}|`.
    """
    return band_quadrature(spec, t, t, nodes_per_unit, tail_tol, config=config)


def band_quadrature(
    spec: ContourSpec,
    t_lo: float,
    t_hi: float,
    nodes_per_unit: float | None = None,
    tail_tol: float | None = None,
    *,
    config: QuadratureConfig = DEFAULT_QUADRATURE,
) -> QuadratureRule:
    """One rule valid for every ``t`` in ``[t_lo, t_hi]``.

    The step resolves the oscillation of ``e^{mu t_hi}``; the rays are long
    enough for the slowest decaying ``e^{mu t_lo}``.
    """
    if not (0 < t_lo <= t_hi and math.isfinite(t_hi)):
        raise ContourDomainError(f"need 0 < t_lo <= t_hi, got {t_lo!r}, {t_hi!r}")
    npu = config.nodes_per_unit if nodes_per_unit is None else float(nodes_per_unit)
    tol = config.tail_tol if tail_tol is None else float(tail_tol)
    if npu <= 0 or not (0 < tol < 1):
        raise ValueError("nodes_per_unit must be positive and tail_tol in (0, 1)")
    q = config.correction_order

    r, theta = spec.radius, spec.theta
    s0 = spec.arc_half_length
    h_target = min(r, 1.0 / t_hi) / npu
    m_arc = max(q, math.ceil(s0 / h_target))
    h = s0 / m_arc
    sigma_max = max(0.0, (math.log(tol) / t_lo + r) / math.cos(theta) - r)
    m_ray = max(q, math.ceil(sigma_max / h))
    total = 2 * (m_arc + m_ray) + 1
    if total > config.max_nodes:
        raise QuadratureError(
            f"{total} nodes needed (limit {config.max_nodes}); rescale the radius"
        )

    c = _gregory_coefficients(q)

    j_arc = np.arange(-m_arc, m_arc + 1)
    s_arc = j_arc * h
    mu_arc = spec.shift + r * np.exp(1j * s_arc / r)
    d_arc = 1j * np.exp(1j * s_arc / r)
    coef_arc = np.ones(j_arc.size)
    coef_arc[0] = coef_arc[-1] = 0.5
    coef_arc[:q] += c
    coef_arc[-q:] += c[::-1]
    w_arc = h * coef_arc * d_arc

    e_up = np.exp(1j * theta)
    sigma = np.arange(0, m_ray + 1) * h
    coef_ray = np.ones(m_ray + 1)
    coef_ray[0] = 0.5
    coef_ray[:q] += c
    mu_up = spec.shift + (r + sigma) * e_up
    w_up = h * coef_ray * e_up
    mu_dn = spec.shift + (r + sigma) * e_up.conjugate()
    w_dn = -h * coef_ray * e_up.conjugate()

    # the corner nodes are shared between the arc and the ray pieces
    w_arc[-1] += w_up[0]
    w_arc[0] += w_dn[0]
    mu = np.concatenate([mu_dn[:0:-1], mu_arc, mu_up[1:]])
    w = np.concatenate([w_dn[:0:-1], w_arc, w_up[1:]]) / (2j * math.pi)
    return QuadratureRule(mu=mu, weights=w, truncation_param=s0 + m_ray * h, step=h)


def laplace_inversion(
    F: Callable[[np.ndarray], np.ndarray],
    spec: ContourSpec,
    t: float,
    *,
    nodes_per_unit: float | None = None,
    tail_tol: float | None = None,
    config: QuadratureConfig = DEFAULT_QUADRATURE,
):
    """Approximate :math:`\\frac{1}{2\\pi i}\\int_\\Gamma e^{\\lambda t} F(\\lambda)\\,d\\lambda`.

    ``F`` is called once with the full node array and must return values with
    the node axis first.  The arc radius is raised to ``radius_scale/t`` for
    small ``t``, which keeps the node count bounded uniformly in ``t``.
    """
    if not (t > 0):
        raise ContourDomainError(f"t must be positive, got {t!r}")
    if spec.radius < config.radius_scale / t:
        spec = spec.with_radius(config.radius_scale / t)
    rule = quadrature(spec, t, nodes_per_unit, tail_tol, config=config)
    vals = np.asarray(F(rule.mu))
    e = np.exp(rule.mu * t)
    out = rule.integrate(e.reshape((-1,) + (1,) * (vals.ndim - 1)) * vals)
    return out[()] if out.ndim == 0 else out
