"""Gamma and Mittag-Leffler functions.

``E_{a,b}(z) = sum_k z^k / Gamma(a k + b)`` is evaluated either by its power
series or as the Bromwich integral of its Laplace image,

    E_{a,b}(z) = 1/(2 pi i) int_Gamma e^mu mu^(a-b) / (mu^a - z) dmu,

over a keyhole contour, adding residues for poles ``mu^a = z`` that lie to the
right of the contour.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Literal

import numpy as np

from .contour import DEFAULT_QUADRATURE, QuadratureConfig, build_keyhole, quadrature
from .errors import ContourDomainError, ContourFallbackWarning, ConvergenceError, PoleError

__all__ = [
    "MlParams",
    "gamma",
    "beta_function",
    "mittag_leffler_series",
    "mittag_leffler",
    "mittag_leffler_array",
    "SWITCH_RADIUS",
    "ML_QUADRATURE",
]

SWITCH_RADIUS = 8.0
SERIES_CAP = 10_000

_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class MlParams:
    """Parameters of ``E_{alpha,beta}`` and the absolute tolerance ``tol``."""

    alpha: float
    beta: float
    tol: float = 1e-14

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be positive, got {self.beta!r}")
        if not (1e-15 < self.tol < 1e-2):
            raise ValueError(f"tol must lie in (1e-15, 1e-2), got {self.tol!r}")


def _sinpi(z):
    # sin(pi z) with exact reduction of the real part modulo 2
    x = np.real(z)
    y = np.imag(z)
    x = x - 2.0 * np.round(0.5 * x)
    return np.sin(np.pi * x) * np.cosh(np.pi * y) + 1j * np.cos(np.pi * x) * np.sinh(np.pi * y)


def _lanczos_log(z):
    # log Gamma(z) for Re z >= 0.5 (principal-ish branch, used through exp)
    z = z - 1.0
    x = _LANCZOS_P[0]
    for i in range(1, len(_LANCZOS_P)):
        x = x + _LANCZOS_P[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(x)


def gamma(z):
    """Gamma function for complex (or real) scalars and arrays.

    Lanczos approximation with reflection for ``Re z < 0.5``.  Raises
    :class:`PoleError` at the nonpositive integers.
    """
    arr = np.asarray(z, dtype=complex)
    zr, zi = arr.real, arr.imag
    poles = (zi == 0) & (zr <= 0) & (zr == np.round(zr))
    if np.any(poles):
        raise PoleError("Gamma has a pole at nonpositive integers")
    left = zr < 0.5
    out = np.empty_like(arr)
    if np.any(~left):
        out[~left] = np.exp(_lanczos_log(arr[~left]))
    if np.any(left):
        w = arr[left]
        out[left] = np.pi / (_sinpi(w) * np.exp(_lanczos_log(1.0 - w)))
    if not np.iscomplexobj(z):
        out = out.real
    return out[()] if out.ndim == 0 else out


def _lgamma_pos(x: float) -> float:
    # log Gamma for real x > 0
    if x < 0.5:
        return math.log(math.pi / abs(math.sin(math.pi * x))) - _lgamma_pos(1.0 - x)
    return float(np.real(_lanczos_log(complex(x))))


def beta_function(a, b):
    """Euler Beta function ``Gamma(a) Gamma(b) / Gamma(a + b)``."""
    return gamma(a) * gamma(b) / gamma(np.add(a, b))


def _series_float(alpha: float, beta: float, z: complex, tol: float, cap: int):
    # returns (sum, log of the largest term magnitude)
    real = z.imag == 0.0
    if z == 0:
        return complex(math.exp(-_lgamma_pos(beta))), -_lgamma_pos(beta)
    logabs = math.log(abs(z))
    phase = math.atan2(z.imag, z.real)
    s = 0.0 if real else 0j
    comp = 0.0 if real else 0j
    log_peak = -math.inf
    small = 0
    prev_log = -math.inf
    for k in range(cap):
        lg = k * logabs - _lgamma_pos(alpha * k + beta)
        mag = math.exp(lg) if lg < 709.0 else math.inf
        if real:
            term = mag if (phase == 0.0 or k % 2 == 0) else -mag
        else:
            term = mag * cmath.exp(1j * k * phase)
        # Kahan summation
        y = term - comp
        tmp = s + y
        comp = (tmp - s) - y
        s = tmp
        log_peak = max(log_peak, lg)
        thr = tol * max(1.0, abs(s)) if math.isfinite(abs(s)) else tol
        if mag < thr and lg < prev_log:
            small += 1
            if small >= 2:
                return complex(s), log_peak
        else:
            small = 0
        prev_log = lg
    raise ConvergenceError(f"Mittag-Leffler series did not converge in {cap} terms")


def _float_reliable(s: complex, log_peak: float, tol: float) -> bool:
    return math.isfinite(abs(s)) and log_peak - 15.0 * math.log(10.0) <= math.log(tol * max(1.0, abs(s)))


def _series_mp(alpha: float, beta: float, z: complex, tol: float, cap: int, digits: int):
    import mpmath

    with mpmath.workdps(digits):
        a = mpmath.mpf(alpha)
        b = mpmath.mpf(beta)
        zz = mpmath.mpc(z) if z.imag else mpmath.mpf(z.real)
        s = mpmath.mpf(0)
        zk = mpmath.mpf(1)
        small = 0
        prev = mpmath.inf
        for k in range(cap):
            term = zk * mpmath.rgamma(a * k + b)
            s += term
            mag = abs(term)
            if mag < tol * max(1, abs(s)) and mag < prev:
                small += 1
                if small >= 2:
                    return complex(s)
            else:
                small = 0
            prev = mag
            zk *= zz
    raise ConvergenceError(f"Mittag-Leffler series did not converge in {cap} terms")


def mittag_leffler_series(p: MlParams, z: complex, *, cap: int = SERIES_CAP) -> complex:
    """Sum the defining power series of ``E_{alpha,beta}(z)``.

    Terms are accumulated until two consecutive, decreasing terms fall below
    ``p.tol`` (relative to the partial sum once it exceeds one).  When the
    largest term is so big that double precision cannot resolve the sum to
    that tolerance, the summation is repeated at raised working precision.

    Raises :class:`ConvergenceError` if ``cap`` terms do not suffice.
    """
    z = complex(z)
    s, log_peak = _series_float(p.alpha, p.beta, z, p.tol, cap)
    if _float_reliable(s, log_peak, p.tol):
        return s
    # the float sum is unreliable here, so size the precision from the peak
    digits = 20 + int(math.ceil((log_peak - math.log(p.tol)) / math.log(10.0)))
    return _series_mp(p.alpha, p.beta, z, p.tol, cap, digits)


def _principal_poles(alpha: float, z: complex) -> list[complex]:
    if z == 0:
        return []
    rho = abs(z) ** (1.0 / alpha)
    arg = math.atan2(z.imag, z.real)
    out = []
    for k in range(-2, 3):
        a = arg + 2.0 * math.pi * k
        if abs(a) < alpha * math.pi:
            out.append(rho * cmath.exp(1j * a / alpha))
    return out


# The corner corrections lose accuracy once a pole sits within a couple of
# units of a corner; doubling the default density keeps them near 1e-13.
ML_QUADRATURE = replace(DEFAULT_QUADRATURE, nodes_per_unit=24.0)
_RADII = (3.0, 2.0, 1.5, 1.0, 4.0, 0.5)
_THETAS = (0.75, 0.6, 0.9, 0.65, 0.85, 0.7, 0.8)


def _pole_clearance(spec, step: float, poles) -> float:
    # Trapezoid accuracy degrades near a pole; near a corner the end
    # corrections degrade much sooner, so corners get a wider berth.
    if not poles:
        return math.inf
    corners = [spec.shift + spec.radius * cmath.exp(1j * sgn * spec.theta) for sgn in (1, -1)]
    score = math.inf
    for mp in poles:
        d_path = spec.distance_to(mp) / (8.0 * step)
        d_corner = min(abs(mp - c) for c in corners) / 1.5
        score = min(score, d_path, d_corner)
    return score


@lru_cache(maxsize=256)
def _unit_rule(spec, config: QuadratureConfig):
    return quadrature(spec, 1.0, config=config)


def _select_contour(alpha: float, beta: float, z: complex, config: QuadratureConfig):
    meromorphic = alpha == 1.0 and beta == 1.0
    shift = complex(min(z.real, 0.0)) if meromorphic else 0j
    poles = [z] if meromorphic else _principal_poles(alpha, z)
    best = None
    for r in _RADII:
        for th in _THETAS:
            spec = build_keyhole(th * math.pi, r, shift)
            rule = _unit_rule(spec, config)
            score = _pole_clearance(spec, rule.step, poles)
            if best is None or score > best[0]:
                best = (score, spec, rule)
            if score >= 1.0:
                break
        if best[0] >= 1.0:
            break
    score, spec, rule = best
    if score < 0.5:
        raise ContourDomainError("every candidate contour passes too close to a pole")
    return spec, rule, poles


def _residues(alpha: float, beta: float, spec, poles) -> complex:
    total = 0j
    for mp in poles:
        if spec.on_right(mp):
            lg = mp + (1.0 - beta) * cmath.log(mp)
            if lg.real > 709.0:
                # the true value overflows double precision
                return complex(math.inf, 0.0)
            total += cmath.exp(lg) / alpha
    return total


def _ml_contour(p: MlParams, z: complex, config: QuadratureConfig) -> complex:
    alpha, beta = p.alpha, p.beta
    spec, rule, poles = _select_contour(alpha, beta, z, config)
    mu = rule.mu
    if alpha == 1.0 and beta == 1.0:
        vals = np.exp(mu) / (mu - z)
    else:
        vals = np.exp(mu) * mu ** (alpha - beta) / (mu**alpha - z)
    return complex(np.sum(rule.weights * vals)) + _residues(alpha, beta, spec, poles)


def mittag_leffler(
    p: MlParams,
    z: complex,
    *,
    method: Literal["auto", "series", "contour"] = "auto",
    switch_radius: float = SWITCH_RADIUS,
    config: QuadratureConfig = ML_QUADRATURE,
) -> complex:
    """Evaluate ``E_{alpha,beta}(z)`` for ``alpha`` in ``(0, 2)``.

    With ``method="auto"`` the series is used for ``|z| <= switch_radius`` and
    the contour integral beyond.  Inside the radius, a series whose terms are
    too large for double precision to resolve the sum is also handed to the
    contour, as is one that cannot converge within its term cap.  If no
    contour keeps clear of the poles the series is used instead, with a
    ten-fold term cap, and a :class:`ContourFallbackWarning` is issued.
    """
    z = complex(z)
    if method == "series":
        return mittag_leffler_series(p, z)
    if not (0 < p.alpha < 2):
        raise ValueError(f"contour route needs alpha in (0, 2), got {p.alpha!r}")
    if method == "auto" and abs(z) <= switch_radius:
        try:
            s, log_peak = _series_float(p.alpha, p.beta, z, p.tol, SERIES_CAP)
        except ConvergenceError:
            # small alpha: terms decay too slowly for the cap even inside the radius
            s, log_peak = complex("nan"), math.inf
        if _float_reliable(s, log_peak, p.tol):
            return s
        # cancellation: prefer the contour, keep the extended-precision series as backup
        try:
            return _ml_contour(p, z, config)
        except ContourDomainError:
            return mittag_leffler_series(p, z)
    try:
        return _ml_contour(p, z, config)
    except ContourDomainError as exc:
        if method == "contour":
            raise
        warnings.warn(f"{exc}; using the series", ContourFallbackWarning, stacklevel=2)
        return mittag_leffler_series(p, z, cap=10 * SERIES_CAP)


def _series_vec(alpha: float, beta: float, z: np.ndarray, tol: float):
    # Vectorized power series; returns sums and the largest term per point.
    from scipy.special import gammaln

    zmax = float(np.max(np.abs(z)))
    if zmax == 0.0:
        return np.full(z.shape, 1.0 / gamma(beta), dtype=complex), np.full(z.shape, 1.0 / abs(gamma(beta)))
    lz = math.log(zmax)
    k = np.arange(SERIES_CAP, dtype=float)
    lt = k * lz - gammaln(alpha * k + beta)
    dec = np.diff(lt) < 0
    below = lt[1:] < math.log(tol) - 3.0
    hit = np.nonzero(dec & below)[0]
    if hit.size == 0:
        raise ConvergenceError(f"Mittag-Leffler series did not converge in {SERIES_CAP} terms")
    kk = k[: hit[0] + 3]
    with np.errstate(divide="ignore", invalid="ignore"):
        logz = np.log(z)
        lterm = kk[:, None] * logz[None, :] - gammaln(alpha * kk + beta)[:, None]
    lterm[0, :] = -gammaln(beta)
    with np.errstate(over="ignore", invalid="ignore"):
        terms = np.exp(lterm)
        return np.sum(terms, axis=0), np.max(np.abs(terms), axis=0)


def mittag_leffler_array(
    alpha: float,
    beta: float,
    z,
    *,
    tol: float = 1e-14,
    switch_radius: float = SWITCH_RADIUS,
    config: QuadratureConfig = ML_QUADRATURE,
) -> np.ndarray:
    """Vectorized ``E_{alpha,beta}`` over an array of arguments.

    Uses the series where double precision resolves it and otherwise the
    contour route; arguments sharing a contour are evaluated together.
    """
    p = MlParams(alpha, beta, tol)
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.empty(flat.shape, dtype=complex)
    if alpha == 1.0 and beta == 1.0:
        return np.exp(z)
    small = np.abs(flat) <= switch_radius
    pending = np.nonzero(~small)[0].tolist()
    if np.any(small):
        idx = np.nonzero(small)[0]
        try:
            s, peak = _series_vec(alpha, beta, flat[idx], tol)
            with np.errstate(invalid="ignore"):
                good = np.isfinite(peak) & (peak * 1e-15 <= tol * np.maximum(1.0, np.abs(s)))
        except ConvergenceError:
            s, good = None, np.zeros(idx.size, dtype=bool)
        if s is not None:
            out[idx[good]] = s[good]
        pending += idx[~good].tolist()
    if not pending:
        return out.reshape(z.shape)
    if not (0 < alpha < 2):
        for i in pending:
            out[i] = mittag_leffler_series(p, flat[i])
        return out.reshape(z.shape)
    groups: dict = {}
    for i in pending:
        try:
            spec, rule, poles = _select_contour(alpha, beta, complex(flat[i]), config)
        except ContourDomainError:
            out[i] = mittag_leffler(p, flat[i], config=config)
            continue
        groups.setdefault(spec, (rule, []))[1].append((i, poles))
    for spec, (rule, members) in groups.items():
        ids = np.array([m[0] for m in members])
        mu = rule.mu
        base = rule.weights * np.exp(mu) * mu ** (alpha - beta)
        mua = mu**alpha
        for lo in range(0, ids.size, 512):
            chunk = ids[lo : lo + 512]
            out[chunk] = base @ (1.0 / (mua[:, None] - flat[chunk][None, :]))
        for i, poles in members:
            out[i] += _residues(alpha, beta, spec, poles)
    return out.reshape(z.shape)
