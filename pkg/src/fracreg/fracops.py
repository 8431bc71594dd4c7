"""Fractional calculus on uniformly sampled vector-valued paths.

All operators work on :class:`SampledPath` objects holding samples
``u(k h)``, ``k = 0..N``, of a function ``[0, T] -> C^d``.

The fractional integral

.. math::

    (B^{-\\alpha} f)(t) = \\frac{1}{\\Gamma(\\alpha)} \\int_0^t (t - s)^{\\alpha - 1} f(s)\\, ds

is computed by product integration: ``f`` is replaced by its piecewise-linear
interpolant and the kernel moments over each cell are exact.  Paths may carry
``exponents``, the non-integer powers ``t^gamma`` known to appear in their
expansion at ``t = 0``.  Product integration then adds starting weights that
make it exact on those powers, which restores second order for data such as
``t^0.7`` that the piecewise-linear interpolant resolves poorly near zero.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .errors import NoiseAmplificationWarning
from .specfun import gamma, mittag_leffler_array

__all__ = [
    "SampledPath",
    "HolderReport",
    "InitialCoefficients",
    "frac_integral",
    "rl_derivative",
    "caputo_derivative",
    "scalar_resolvent",
    "extract_initial_coeffs",
    "holder_seminorm",
    "zygmund_seminorm",
    "estimate_holder_exponent",
    "power_rule",
    "hat_convolution",
    "initial_derivative",
    "taylor_part",
]

MIN_INTERVALS = 8
_MAX_EXPONENTS = 4


def _clean_exponents(values, upper: float = 3.0) -> tuple[float, ...]:
    out = []
    for g in sorted(set(round(float(v), 12) for v in values)):
        if 0 < g < upper and abs(g - round(g)) > 1e-9:
            out.append(g)
    return tuple(out[:_MAX_EXPONENTS])


@dataclass(frozen=True)
class SampledPath:
    """Samples of ``u : [0, T] -> C^d`` on the uniform grid ``k * T / N``.

    ``values`` has shape ``(N + 1, d)``.  ``exponents`` lists non-integer
    powers of ``t`` present in the expansion of ``u`` at zero.
    """

    t_end: float
    values: np.ndarray
    exponents: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must be positive, got {self.t_end!r}")
        vals = np.array(self.values, dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[1] < 1:
            raise ValueError("values must have shape (N + 1, d)")
        if vals.shape[0] - 1 < MIN_INTERVALS:
            raise ValueError(f"need at least {MIN_INTERVALS} intervals, got {vals.shape[0] - 1}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "exponents", _clean_exponents(self.exponents))

    @property
    def n_intervals(self) -> int:
        return self.values.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def step(self) -> float:
        return self.t_end / self.n_intervals

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_intervals + 1)

    @classmethod
    def from_function(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        t_end: float,
        n: int,
        exponents: Sequence[float] = (),
    ) -> "SampledPath":
        """Sample ``fn`` (vectorized over time) at ``n + 1`` grid points."""
        t = np.linspace(0.0, t_end, n + 1)
        return cls(t_end, np.asarray(fn(t)), tuple(exponents))

    def replace(self, values=None, exponents=None) -> "SampledPath":
        return SampledPath(
            self.t_end,
            self.values if values is None else values,
            self.exponents if exponents is None else tuple(exponents),
        )

    def __add__(self, other: "SampledPath") -> "SampledPath":
        _check_same_grid(self, other)
        return SampledPath(self.t_end, self.values + other.values,
                           self.exponents + other.exponents)

    def __sub__(self, other: "SampledPath") -> "SampledPath":
        _check_same_grid(self, other)
        return SampledPath(self.t_end, self.values - other.values,
                           self.exponents + other.exponents)

    def scaled(self, c: complex) -> "SampledPath":
        return self.replace(values=c * self.values)

    def sup_norm(self, start: int = 0) -> float:
        """``max_k ||u(t_k)||_inf`` over ``k >= start``."""
        return float(np.max(np.abs(self.values[start:]))) if self.values[start:].size else 0.0

    def to_csv(self, target) -> None:
        """Write columns ``t, re_0, im_0, re_1, im_1, ...`` to a path or text stream."""
        header = ["t"]
        for i in range(self.dim):
            header += [f"re_{i}", f"im_{i}"]
        body = np.empty((self.n_intervals + 1, 1 + 2 * self.dim))
        body[:, 0] = self.times
        body[:, 1::2] = self.values.real
        body[:, 2::2] = self.values.imag
        if hasattr(target, "write"):
            self._write_rows(target, header, body)
        else:
            with open(target, "w", newline="") as fh:
                self._write_rows(fh, header, body)

    @staticmethod
    def _write_rows(fh, header, body) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in body:
            w.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path, exponents: Sequence[float] = ()) -> "SampledPath":
        """Read the layout written by :meth:`to_csv`; checks uniform spacing."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][0].strip() != "t":
            raise ValueError(f"{path}: first column must be 't'")
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
        if data.shape[1] < 3 or data.shape[1] % 2 == 0:
            raise ValueError(f"{path}: expected t followed by re/im pairs")
        t = data[:, 0]
        if abs(t[0]) > 1e-12 or not np.allclose(np.diff(t), t[-1] / (t.size - 1), rtol=1e-8, atol=1e-12):
            raise ValueError(f"{path}: times must be uniform and start at 0")
        vals = data[:, 1::2] + 1j * data[:, 2::2]
        return cls(float(t[-1]), vals, tuple(exponents))


def _check_same_grid(a: SampledPath, b: SampledPath) -> None:
    if a.values.shape != b.values.shape or not math.isclose(a.t_end, b.t_end, rel_tol=1e-12):
        raise ValueError("paths live on different grids")


def power_rule(delta: float, alpha: float, t):
    """``B^alpha t^delta = Gamma(delta+1)/Gamma(delta+1-alpha) t^(delta-alpha)``.

    Negative ``alpha`` gives the fractional integral of ``t^delta``.
    """
    t = np.asarray(t, dtype=float)
    c = gamma(delta + 1.0) / gamma(delta + 1.0 - alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        return c * t ** (delta - alpha)


# -- product integration ---------------------------------------------------


def _pl_weights(alpha: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    # I_k = h^a / Gamma(a+2) * (a0[k] f_0 + sum_{j=1..k} b[k-j] f_j)
    p = alpha + 1.0
    j = np.arange(1, n + 1, dtype=float)
    with np.errstate(divide="ignore"):
        lm = np.log1p(-1.0 / j)  # -inf at j = 1, where expm1 gives -1 exactly
    b = np.empty(n + 1)
    b[0] = 1.0
    b[1:] = j**p * (np.expm1(p * np.log1p(1.0 / j)) + np.expm1(p * lm))
    a0 = np.empty(n + 1)
    a0[0] = 0.0
    a0[1:] = j**p * (np.expm1(p * lm) + p / j)
    return a0, b


def _pl_integral(values: np.ndarray, alpha: float, h: float) -> np.ndarray:
    n = values.shape[0] - 1
    a0, b = _pl_weights(alpha, n)
    conv = fftconvolve(b[:, None], values[1:], axes=0)[:n] if n > 0 else values[:0]
    out = np.zeros_like(values)
    out[1:] = conv + a0[1:, None] * values[0]
    return out * (h**alpha / math.gamma(alpha + 2.0))


def _starting_correction(alpha: float, h: float, n: int, exps: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    # Weights W[k, j] on nodes j = 0..m+1 that leave 1 and t untouched and
    # remove the product-integration error on t^g for every g in exps.
    exps = [g for g in exps if g < 2.0]
    m = len(exps)
    if m == 0:
        return np.zeros((n + 1, 0)), np.arange(0)
    nodes = np.arange(m + 2)
    t = np.arange(n + 1) * h
    basis = [0.0, 1.0] + list(exps)
    mat = np.array([[float(j) ** g if (j > 0 or g == 0) else 0.0 for j in nodes] for g in basis])
    rhs = np.zeros((m + 2, n + 1))
    for q, g in enumerate(exps, start=2):
        exact = power_rule(g, -alpha, t)
        approx = _pl_integral((t**g)[:, None].astype(complex), alpha, h)[:, 0].real
        rhs[q] = (exact - approx) / h**g
    weights = np.linalg.solve(mat, rhs).T
    return weights, nodes


def frac_integral(f: SampledPath, alpha: float) -> SampledPath:
    """Riemann-Liouville integral ``B^{-alpha} f`` by product integration.

    Exact at the grid points for piecewise-linear ``f`` and for the powers
    listed in ``f.exponents``.
    """
    if not (alpha > 0):
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    h = f.step
    out = _pl_integral(f.values, alpha, h)
    weights, nodes = _starting_correction(alpha, h, f.n_intervals, f.exponents)
    if nodes.size:
        out = out + weights @ f.values[nodes]
    new_exps = [g + alpha for g in (0.0, 1.0) + f.exponents]
    return SampledPath(f.t_end, out, _clean_exponents(new_exps))


def _difference(y: np.ndarray, h: float, order: int) -> np.ndarray:
    # second-order accurate first or second derivative, one-sided at the ends
    if order == 1:
        return np.gradient(y, h, axis=0, edge_order=2)
    if order != 2:
        raise ValueError("only first and second differences are supported")
    out = np.empty_like(y)
    out[1:-1] = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / h**2
    out[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / h**2
    out[-1] = (2.0 * y[-1] - 5.0 * y[-2] + 4.0 * y[-3] - y[-4]) / h**2
    return out


def _hf_ratio(y: np.ndarray, skip: int) -> float:
    tail = y[skip:]
    if tail.shape[0] < 3:
        return 0.0
    d2 = tail[2:] - 2 * tail[1:-1] + tail[:-2]
    den = np.sqrt(np.mean(np.abs(tail) ** 2))
    return float(np.sqrt(np.mean(np.abs(d2) ** 2)) / den) if den > 0 else 0.0


def rl_derivative(f: SampledPath, alpha: float, order_cap: int = 2) -> SampledPath:
    """Riemann-Liouville derivative ``D^{m+1} B^{-(m+1-alpha)} f``, ``m = floor(alpha)``.

    Derivatives use second-order differences: centered inside, one-sided at
    the two ends.  Issues :class:`NoiseAmplificationWarning` when the
    result is dominated by grid-scale oscillation.
    """
    if not (alpha > 0):
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    m = int(math.floor(alpha))
    if m + 1 > order_cap:
        raise ValueError(f"alpha={alpha} needs {m + 1} differences, order_cap={order_cap}")
    h = f.step
    g = frac_integral(f, m + 1 - alpha) if m + 1 - alpha > 0 else f
    y = _difference(g.values, h, m + 1)
    skip = max(3, f.n_intervals // 20)
    ratio = _hf_ratio(y, skip)
    floor = 1e3 * np.finfo(float).eps * float(np.max(np.abs(g.values))) / h ** (m + 1)
    rms = float(np.sqrt(np.mean(np.abs(y[skip:]) ** 2))) if y[skip:].size else 0.0
    if ratio > 0.05 and ratio * rms > floor:
        warnings.warn(
            f"finite differences amplified grid-scale content (ratio {ratio:.3g})",
            NoiseAmplificationWarning,
            stacklevel=2,
        )
    new_exps = [gm - alpha for gm in (0.0, 1.0) + f.exponents]
    return SampledPath(f.t_end, y, _clean_exponents(new_exps))


def initial_derivative(u: SampledPath) -> np.ndarray:
    """One-sided estimate of ``u'(0)``.

    Interpolates the first samples in the basis ``1, t, t^2`` plus the
    annotated powers in ``(1, 3)``; without annotations this is the usual
    three-point formula ``(-3 u_0 + 4 u_1 - u_2) / (2 h)``.
    """
    powers = [0.0, 1.0, 2.0] + [g for g in u.exponents if 1.0 < g < 3.0]
    nodes = np.arange(len(powers), dtype=float)
    mat = np.array([[j**g if (j > 0 or g == 0) else 0.0 for g in powers] for j in nodes])
    coef = np.linalg.solve(mat, u.values[: len(powers)])
    return coef[1] / u.step


def taylor_part(u: SampledPath, m: int) -> np.ndarray:
    """Samples of ``sum_{k<=m} t^k u^(k)(0)/k!`` with ``u'(0)`` from :func:`initial_derivative`."""
    if m >= 2:
        raise ValueError("Taylor removal is implemented for m <= 1")
    t = u.times[:, None]
    poly = np.repeat(u.values[:1], u.n_intervals + 1, axis=0)
    if m >= 1:
        poly = poly + t * initial_derivative(u)
    return poly


def caputo_derivative(u: SampledPath, alpha: float) -> SampledPath:
    """Caputo derivative: :func:`rl_derivative` after removing the Taylor polynomial at 0."""
    if not (0 < alpha < 2):
        raise ValueError(f"alpha must lie in (0, 2), got {alpha!r}")
    m = int(math.floor(alpha))
    v = u.replace(values=u.values - taylor_part(u, m))
    return rl_derivative(v, alpha)


# -- resolvent of B^alpha ----------------------------------------------------


def hat_convolution(q_vals: np.ndarray, qp_vals: np.ndarray, f_vals: np.ndarray, h: float) -> np.ndarray:
    """``int_0^{t_n} K(t_n - s) f(s) ds`` for piecewise-linear ``f``.

    ``q_vals[j]`` and ``qp_vals[j]`` are the second and first antiderivatives
    of the kernel ``K`` at ``j h`` (both vanish at 0).  They are either
    scalars per node or, for a diagonal kernel, one value per component
    (shape ``(N + 1, d)``).  The sum is written in second differences of
    ``f`` so that errors in the kernel data are not amplified by ``1/h``.
    """
    n = f_vals.shape[0] - 1
    out = np.zeros(f_vals.shape, dtype=complex)
    if n == 0:
        return out
    q = np.asarray(q_vals)
    qp = np.asarray(qp_vals)
    if q.ndim == 1:
        q = q.reshape((-1,) + (1,) * (f_vals.ndim - 1))
        qp = qp.reshape((-1,) + (1,) * (f_vals.ndim - 1))
    out[1:] = qp[1:] * f_vals[0] + q[1:] * ((f_vals[1] - f_vals[0]) / h)
    if n >= 2:
        d2 = (f_vals[:-2] - 2.0 * f_vals[1:-1] + f_vals[2:]) / h  # centres j = 1..n-1
        if np.any(d2):
            out[2:] += fftconvolve(q[1:n], d2, axes=0)[: n - 1]
    return out


def scalar_resolvent(lam: complex, alpha: float, f: SampledPath) -> SampledPath:
    """``(lam - B^alpha)^{-1} f = -int_0^t E_{a,a}(lam (t-s)^a) (t-s)^(a-1) f(s) ds``."""
    if not (0 < alpha < 2):
        raise ValueError(f"alpha must lie in (0, 2), got {alpha!r}")
    tau = f.times
    z = lam * tau**alpha
    q = tau ** (alpha + 1.0) * mittag_leffler_array(alpha, alpha + 2.0, z)
    qp = tau**alpha * mittag_leffler_array(alpha, alpha + 1.0, z)
    conv = hat_convolution(q, qp, f.values, f.step)
    new_exps = [g + alpha for g in (0.0, 1.0) + f.exponents]
    return SampledPath(f.t_end, -conv, _clean_exponents(new_exps))


# -- initial coefficients -------------------------------------------------------


@dataclass(frozen=True)
class InitialCoefficients:
    """Estimates ``f_k = (B^alpha u)^(k)(0) / Gamma(alpha + k + 1)``.

    ``history`` holds the estimate for each dyadic ``t`` (largest first);
    ``t_used`` is the ``t`` whose estimate was selected.
    """

    coeffs: list[np.ndarray]
    t_used: float
    history: list[tuple[float, list[np.ndarray]]]
    ill_conditioned: bool


def _coeffs_at(w_of, t: float, alpha: float, order: int) -> list[np.ndarray]:
    j = np.arange(1, order + 2, dtype=float)
    k = np.arange(order + 1, dtype=float)
    mat = (j[:, None] * t) ** (k[None, :] + alpha)
    rhs = np.stack([w_of(int(jj)) for jj in j])
    sol = np.linalg.solve(mat, rhs)
    return [sol[i] for i in range(order + 1)]


def extract_initial_coeffs(
    u: SampledPath,
    v: SampledPath | None,
    alpha: float,
    N: int,
    *,
    full_output: bool = False,
):
    """Solve ``sum_k (j t)^(k+alpha) f_k = u(j t) - v(j t)``, ``j = 1..N+1``.

    ``t`` runs over dyadic multiples of the grid step and the estimate is
    extrapolated to ``t -> 0`` by keeping the value at which successive
    differences stop shrinking.  Returns ``[f_0, ..., f_N]`` or, with
    ``full_output``, an :class:`InitialCoefficients` report.
    """
    if N not in (0, 1):
        raise ValueError("N must be 0 or 1")
    w = u.values if v is None else u.values - v.values
    h = u.step
    max_mult = u.n_intervals // (N + 1)
    mults = []
    k = 1
    while k <= max_mult:
        mults.append(k)
        k *= 2
    mults.reverse()
    history = []
    for mlt in mults:
        t = mlt * h
        est = _coeffs_at(lambda j, mlt=mlt: w[j * mlt], t, alpha, N)
        history.append((t, est))
    pick = len(history) - 1
    if len(history) >= 3:
        diffs = [
            max(float(np.max(np.abs(a - b))) for a, b in zip(history[i][1], history[i + 1][1]))
            for i in range(len(history) - 1)
        ]
        for i in range(1, len(diffs)):
            if diffs[i] > diffs[i - 1]:
                pick = i
                break
    t_used, coeffs = history[pick]
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    ill = np.finfo(float).eps * scale * t_used ** (-alpha - N) > 1e-6 * max(
        1.0, max(float(np.max(np.abs(c))) for c in coeffs)
    )
    if full_output:
        return InitialCoefficients(coeffs, t_used, history, bool(ill))
    return coeffs


# -- Hölder-type seminorms ------------------------------------------------------


def _derivative_values(f: SampledPath, m: int) -> np.ndarray:
    if m == 0:
        return f.values
    if m == 1:
        return np.gradient(f.values, f.step, axis=0, edge_order=2)
    raise ValueError("m must be 0 or 1")


def _vec_norm(x: np.ndarray) -> np.ndarray:
    return np.max(np.abs(x), axis=-1)


def _modulus(vals: np.ndarray, shift: int) -> float:
    return float(np.max(_vec_norm(vals[shift:] - vals[:-shift])))


def holder_seminorm(f: SampledPath, beta: float, m: int = 0) -> float:
    """``max_h h^{-beta} max_t ||f^(m)(t+h) - f^(m)(t)||`` over grid shifts ``h``."""
    if not (0 < beta <= 1):
        raise ValueError(f"beta must lie in (0, 1], got {beta!r}")
    vals = _derivative_values(f, m)
    h = f.step
    best = 0.0
    for k in range(1, f.n_intervals + 1):
        best = max(best, _modulus(vals, k) / (k * h) ** beta)
    return best


def zygmund_seminorm(f: SampledPath, zero_extension: bool = False) -> float:
    """``sup_h h^{-1} ||f(t+h) - 2 f(t) + f(t-h)||`` over grid points and shifts.

    With ``zero_extension`` the path is extended by zero to ``t < 0`` first,
    so the value stays bounded under refinement only if ``||f(t)|| = O(t)``.
    """
    vals = f.values
    n = f.n_intervals
    if zero_extension:
        vals = np.concatenate([np.zeros((n, f.dim), dtype=complex), vals])
    h = f.step
    best = 0.0
    for k in range(1, (vals.shape[0] - 1) // 2 + 1):
        d2 = vals[2 * k:] - 2.0 * vals[k:-k] + vals[: -2 * k]
        best = max(best, float(np.max(_vec_norm(d2))) / (k * h))
    return best


@dataclass(frozen=True)
class HolderReport:
    """Modulus-of-continuity fit.

    ``exponent_grid`` lists ``(h, omega(h))`` for the dyadic shifts used in
    the fit; ``fit_range`` is the ``(h_min, h_max)`` window.
    """

    exponent_grid: list[tuple[float, float]]
    fitted_exponent: float
    degenerate: bool
    fit_range: tuple[float, float]
    path: SampledPath | None = field(default=None, repr=False, compare=False)

    def seminorm_at(self, beta: float) -> float:
        """``max_h h^{-beta} omega(h)`` over the recorded shifts."""
        if not self.exponent_grid:
            return 0.0
        return max(w / h**beta for h, w in self.exponent_grid)


def estimate_holder_exponent(f: SampledPath, *, report: bool = False):
    """Least-squares slope of ``log omega(h)`` against ``log h``.

    ``h`` runs over dyadic multiples of the step in ``[4 step, T/16]``,
    extended towards ``T/4`` on coarse grids to keep three points.  The
    slope is clamped to ``[0, 1.999]``.  A modulus below ``1e-13`` marks
    the fit as degenerate (exponent reported as ``nan``).
    """
    h = f.step
    n = f.n_intervals
    grid = []
    k = 4
    top = f.t_end / 16
    while k * h <= top + 1e-12 * f.t_end or (len(grid) < 3 and k * h <= f.t_end / 4 + 1e-12 * f.t_end):
        grid.append((k * h, _modulus(f.values, k)))
        k *= 2
    if len(grid) < 2:
        raise ValueError(f"grid too coarse for an exponent fit (N = {n})")
    hs = np.array([g[0] for g in grid])
    ws = np.array([g[1] for g in grid])
    degenerate = bool(np.max(ws) < 1e-13)
    if degenerate:
        expo = math.nan
    else:
        ws_safe = np.maximum(ws, 1e-300)
        slope = np.polyfit(np.log(hs), np.log(ws_safe), 1)[0]
        expo = float(min(max(slope, 0.0), 1.999))
    rep = HolderReport(grid, expo, degenerate, (float(hs[0]), float(hs[-1])), f)
    return rep if report else expo
