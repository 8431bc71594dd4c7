"""Representation-formula solver for fractional Cauchy problems in ``C^n``.

Three problem kinds are supported, all with ``alpha`` in ``(0, 2)``, ``alpha != 1``:

``abstract``
    ``B^alpha u - A u = f``, with ``B^alpha`` the inverse of the
    Riemann-Liouville integral (so all initial traces vanish).
``riemann_liouville``
    ``D_t B^{alpha-1} u - A u = f``, ``B^{alpha-1} u(0) = g0``, ``alpha`` in ``(1, 2)``.
``caputo``
    Caputo derivative, ``u(0) = u0`` and, for ``alpha > 1``, ``u'(0) = u1``.

The solution is assembled from time kernels

.. math::

    K_g(t) = \\frac{1}{2\\pi i} \\int_\\Gamma e^{\\mu t} \\mu^{g} (\\mu^\\alpha - A)^{-1} d\\mu,

namely ``H`` (``g = alpha - 1``), ``S`` (``g = 0``), ``H1`` (``g = alpha - 2``,
the integral of ``H``) and the first and second antiderivatives ``Q1``, ``Q2``
of ``S``.  The forcing enters through ``int_0^t S(t - s) f(s) ds``, which is
evaluated exactly on the piecewise-linear interpolant of ``f`` using ``Q1``
and ``Q2``.

Each dyadic band of times ``(T 2^{-b-1}, T 2^{-b}]`` shares one keyhole
contour whose radius scales like the inverse of the band's largest time, so
the resolvents at its nodes are reused by every time in the band.
"""

from __future__ import annotations

import cmath
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .contour import DEFAULT_QUADRATURE, ContourSpec, QuadratureConfig, band_quadrature, build_keyhole
from .errors import CompatibilityWarning, NonNormalError, SectorError
from .fracops import (
    HolderReport,
    SampledPath,
    caputo_derivative,
    estimate_holder_exponent,
    hat_convolution,
    holder_seminorm,
    initial_derivative,
    rl_derivative,
)
from .opalgebra import MatrixOperator, eig_oracle, interp_norm

__all__ = [
    "KINDS",
    "ProblemSpec",
    "SolutionBundle",
    "CompatibilityEntry",
    "CompatibilityReport",
    "RegularityReport",
    "propagator_S",
    "propagator_H",
    "solve",
    "residual_check",
    "compatibility_report",
    "regularity_verifier",
]

KINDS = ("abstract", "riemann_liouville", "caputo")

# kernel name -> power of mu multiplying the resolvent (alpha-dependent ones are callables)
_KERNEL_POWER: dict[str, Callable[[float], float]] = {
    "H": lambda a: a - 1.0,
    "S": lambda a: 0.0,
    "H1": lambda a: a - 2.0,
    "Q1": lambda a: -1.0,
    "Q2": lambda a: -2.0,
}

_RADIUS_FACTORS = (3.0, 2.0, 4.0, 1.5, 6.0)
_THETA_FRACTIONS = (0.5, 0.3, 0.7, 0.15, 0.85)
_MODAL_COND = 1e6


def _as_vector(x, dim: int, name: str) -> np.ndarray | None:
    if x is None:
        return None
    v = np.atleast_1d(np.asarray(x, dtype=complex)).ravel()
    if v.shape != (dim,):
        raise ValueError(f"{name} must have length {dim}, got {v.shape}")
    return v


@dataclass(frozen=True)
class ProblemSpec:
    """A fractional Cauchy problem on ``[0, t_end]``.

    ``forcing`` is ``None`` (zero), a :class:`SampledPath`, or a callable
    mapping an array of times to an array of shape ``(len(t), dim)``;
    ``forcing_exponents`` annotates a callable's non-integer powers at 0.
    """

    alpha: float
    kind: str
    A: MatrixOperator
    forcing: SampledPath | Callable | None = None
    u0: np.ndarray | None = None
    u1: np.ndarray | None = None
    g0: np.ndarray | None = None
    t_end: float = 1.0
    beta_target: float | None = None
    theta_target: float | None = None
    forcing_exponents: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not (0 < a < 2) or a == 1.0:
            raise ValueError(f"alpha must lie in (0, 2) without 1, got {self.alpha!r}")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not (self.t_end > 0):
            raise ValueError("t_end must be positive")
        d = self.A.dim
        object.__setattr__(self, "u0", _as_vector(self.u0, d, "u0"))
        object.__setattr__(self, "u1", _as_vector(self.u1, d, "u1"))
        object.__setattr__(self, "g0", _as_vector(self.g0, d, "g0"))
        if self.kind == "caputo":
            if self.u0 is None:
                raise ValueError("caputo problems need u0")
            if (self.u1 is not None) != (a > 1):
                raise ValueError("caputo problems take u1 exactly when alpha > 1")
            if self.g0 is not None:
                raise ValueError("g0 belongs to riemann_liouville problems")
        elif self.kind == "riemann_liouville":
            if not (1 < a < 2):
                raise ValueError("riemann_liouville problems need alpha in (1, 2)")
            if self.g0 is None:
                raise ValueError("riemann_liouville problems need g0")
            if self.u0 is not None or self.u1 is not None:
                raise ValueError("riemann_liouville problems take g0 only")
        elif any(v is not None for v in (self.u0, self.u1, self.g0)):
            raise ValueError("abstract problems take no initial data")
        if not (a * math.pi / 2 < self.A.phi):
            raise SectorError(
                f"sector half-angle {self.A.phi:.4f} must exceed alpha*pi/2 = {a * math.pi / 2:.4f}"
            )
        if isinstance(self.forcing, SampledPath):
            if self.forcing.dim != d:
                raise ValueError("forcing dimension does not match A")
            if not math.isclose(self.forcing.t_end, self.t_end, rel_tol=1e-12):
                raise ValueError("forcing must be sampled on [0, t_end]")
        if self.beta_target is not None and not (0 < self.beta_target < a):
            raise ValueError("beta_target must lie in (0, alpha)")
        if self.theta_target is not None and not (0 < self.theta_target < 1):
            raise ValueError("theta_target must lie in (0, 1)")

    def replace(self, **changes) -> "ProblemSpec":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return ProblemSpec(**fields)

    def default_grid(self) -> int:
        return self.forcing.n_intervals if isinstance(self.forcing, SampledPath) else 1024

    def forcing_path(self, grid_n: int | None = None) -> SampledPath:
        """The forcing sampled on the ``grid_n``-interval grid."""
        n = self.default_grid() if grid_n is None else int(grid_n)
        d = self.A.dim
        if self.forcing is None:
            return SampledPath(self.t_end, np.zeros((n + 1, d), dtype=complex))
        if isinstance(self.forcing, SampledPath):
            if self.forcing.n_intervals != n:
                raise ValueError(
                    f"forcing has {self.forcing.n_intervals} intervals, solve asked for {n}"
                )
            return self.forcing
        t = np.linspace(0.0, self.t_end, n + 1)
        vals = np.asarray(self.forcing(t), dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None] if d == 1 or vals.shape[0] == n + 1 else np.broadcast_to(vals, (n + 1, d))
        vals = np.broadcast_to(vals, (n + 1, d))
        return SampledPath(self.t_end, vals, self.forcing_exponents)

    # -- JSON -----------------------------------------------------------------

    @classmethod
    def from_json(cls, source, base_dir=None) -> "ProblemSpec":
        """Load a problem from a JSON path or mapping.

        Keys: ``alpha``, ``kind``, ``operator`` (see
        :meth:`MatrixOperator.from_json`), optional ``t_end``, ``u0``, ``u1``,
        ``g0`` (lists of numbers or ``[re, im]`` pairs), ``forcing`` (a
        constant vector under ``{"constant": [...]}`` or a CSV path under
        ``{"csv": "file.csv"}``), ``beta_target``, ``theta_target``.
        """
        if isinstance(source, dict):
            doc = source
        else:
            path = Path(source)
            doc = json.loads(path.read_text())
            base_dir = base_dir or path.parent
        base = Path(base_dir) if base_dir else Path(".")
        A = MatrixOperator.from_json(doc["operator"])

        def vec(key):
            if doc.get(key) is None:
                return None
            raw = np.asarray(doc[key], dtype=float)
            return raw[..., 0] + 1j * raw[..., 1] if raw.ndim == 2 else raw.astype(complex)

        forcing = None
        fdoc = doc.get("forcing")
        t_end = float(doc.get("t_end", 1.0))
        if isinstance(fdoc, dict) and "constant" in fdoc:
            raw = np.asarray(fdoc["constant"], dtype=float)
            c = raw[..., 0] + 1j * raw[..., 1] if raw.ndim == 2 else raw.astype(complex)
            c = np.broadcast_to(c, (A.dim,)).copy()
            forcing = lambda t, c=c: np.broadcast_to(c, (np.size(t), A.dim))  # noqa: E731
        elif isinstance(fdoc, dict) and "csv" in fdoc:
            forcing = SampledPath.from_csv(base / fdoc["csv"], fdoc.get("exponents", ()))
            t_end = forcing.t_end
        elif fdoc is not None:
            raise ValueError("forcing must be {'constant': [...]} or {'csv': path}")
        return cls(
            alpha=float(doc["alpha"]),
            kind=doc["kind"],
            A=A,
            forcing=forcing,
            u0=vec("u0"),
            u1=vec("u1"),
            g0=vec("g0"),
            t_end=t_end,
            beta_target=doc.get("beta_target"),
            theta_target=doc.get("theta_target"),
        )


@dataclass(frozen=True)
class SolutionBundle:
    """Solution samples with ``frac_deriv = A u + f`` and diagnostics."""

    u: SampledPath
    frac_deriv: SampledPath
    Au: SampledPath
    residual_sup: float
    diagnostics: tuple[HolderReport, HolderReport] | None = None
    compatibility: "CompatibilityReport | None" = None

    def to_csv(self, path) -> None:
        """Columns ``t``, then ``u``, ``frac_deriv`` and ``Au`` as re/im pairs."""
        d = self.u.dim
        header = ["t"]
        for name in ("u", "frac_deriv", "Au"):
            for i in range(d):
                header += [f"{name}_re_{i}", f"{name}_im_{i}"]
        cols = [self.u.times[:, None]]
        for p in (self.u, self.frac_deriv, self.Au):
            block = np.empty((p.n_intervals + 1, 2 * d))
            block[:, 0::2] = p.values.real
            block[:, 1::2] = p.values.imag
            cols.append(block)
        data = np.hstack(cols)
        lines = [",".join(header)]
        lines += [",".join(repr(float(x)) for x in row) for row in data]
        Path(path).write_text("\n".join(lines) + "\n")

    def diagnostics_dict(self) -> dict:
        out = {"residual_sup": self.residual_sup}
        if self.diagnostics is not None:
            fd, au = self.diagnostics
            out["holder_exponent_frac_deriv"] = _json_float(fd.fitted_exponent)
            out["holder_exponent_Au"] = _json_float(au.fitted_exponent)
        out["compatibility"] = [] if self.compatibility is None else self.compatibility.as_list()
        return out


def _json_float(x: float):
    return None if not math.isfinite(x) else float(x)


# -- spectral basis and contours ------------------------------------------------


@dataclass
class _Basis:
    eigvals: np.ndarray
    V: np.ndarray | None = None
    Vinv: np.ndarray | None = None

    @property
    def modal(self) -> bool:
        return self.V is not None


def _basis(A: MatrixOperator) -> _Basis:
    try:
        vals, V = eig_oracle(A)
        if A.weights is None:
            Vinv = V.conj().T
        else:
            Vinv = V.conj().T * A.weights[None, :]
        return _Basis(vals, V, Vinv)
    except NonNormalError:
        pass
    vals, V = np.linalg.eig(A.entries)
    if np.linalg.cond(V) <= _MODAL_COND:
        return _Basis(vals.astype(complex), V, np.linalg.inv(V))
    return _Basis(vals.astype(complex))


def _roots(alpha: float, eigvals: np.ndarray) -> list[complex]:
    # solutions mu (principal branch) of mu^alpha = a
    out = []
    for a in eigvals:
        a = complex(a)
        if abs(a) == 0.0:
            out.append(0j)
            continue
        rho = abs(a) ** (1.0 / alpha)
        arg = cmath.phase(a)
        for k in (-1, 0, 1):
            ang = arg + 2.0 * math.pi * k
            if abs(ang) < alpha * math.pi:
                out.append(rho * cmath.exp(1j * ang / alpha))
    return out


def _theta_max(A: MatrixOperator, alpha: float) -> float:
    tmax = min(0.95 * math.pi, A.phi / alpha)
    if tmax <= math.pi / 2:
        raise SectorError(f"no contour angle satisfies alpha*theta < phi (phi={A.phi:.4f})")
    return tmax


def _score(spec: ContourSpec, step: float, t_hi: float, roots) -> float:
    corners = [spec.radius * cmath.exp(1j * s * spec.theta) for s in (1, -1)]
    score = math.inf
    for p in roots:
        if spec.on_right(p):
            return -1.0
        score = min(score, spec.distance_to(p) / (8.0 * step),
                    min(abs(p - c) for c in corners) * t_hi / 1.5)
    return score


def _band_contour(alpha, A, roots, t_lo, t_hi, spec, config):
    tmax = _theta_max(A, alpha)
    if spec is not None:
        if not (alpha * spec.theta < A.phi):
            raise SectorError(f"alpha*theta = {alpha * spec.theta:.4f} must stay below phi = {A.phi:.4f}")
        thetas = [spec.theta]
        r_min = spec.radius
    else:
        thetas = [math.pi / 2 + f * (tmax - math.pi / 2) for f in _THETA_FRACTIONS]
        r_min = 0.0
    best = None
    for c in _RADIUS_FACTORS:
        for th in thetas:
            inside = [abs(p) for p in roots if abs(cmath.phase(p)) < th] if roots else []
            r = max(c / t_hi, r_min, 1.3 * max(inside, default=0.0))
            cand = build_keyhole(th, r)
            rule = band_quadrature(cand, t_lo, t_hi, config=config)
            sc = _score(cand, rule.step, t_hi, roots)
            if best is None or sc > best[0]:
                best = (sc, cand, rule)
            if sc >= 1.0:
                return cand, rule
    if best[0] <= 0:
        raise SectorError("no admissible contour keeps the spectrum on its left")
    return best[1], best[2]


def _bands(times: np.ndarray, t_end: float):
    # index ranges of dyadic time bands, largest times first
    out = []
    hi = t_end
    idx = np.arange(times.size)
    pos = times > 0
    while True:
        lo = hi / 2
        sel = idx[pos & (times > lo * (1 + 1e-12)) & (times <= hi * (1 + 1e-12))]
        if sel.size:
            out.append((sel, float(times[sel].min()), float(times[sel].max())))
        if lo <= times[pos].min() * (1 - 1e-12):
            break
        hi = lo
    return out


def _kernels(A, alpha, basis, times, t_end, names, spec, config):
    """Kernel values at ``times``: modal ``(n, d)`` or full ``(n, d, d)`` arrays."""
    d = A.dim
    roots = _roots(alpha, basis.eigvals)
    n = times.size
    shape = (n, d) if basis.modal else (n, d, d)
    out = {k: np.zeros(shape, dtype=complex) for k in names}
    zero = times == 0
    for k in names:
        if np.any(zero):
            if k == "H":
                out[k][zero] = 1.0 if basis.modal else np.eye(d)
            elif k == "S" and alpha < 1:
                out[k][zero] = np.nan
    eye = np.eye(d)
    for sel, t_lo, t_hi in _bands(times, t_end):
        _, rule = _band_contour(alpha, A, roots, t_lo, t_hi, spec, config)
        mu = rule.mu
        mua = mu**alpha
        E = np.exp(np.outer(times[sel], mu))
        if basis.modal:
            res = 1.0 / (mua[:, None] - basis.eigvals[None, :])
        else:
            res = np.linalg.inv(mua[:, None, None] * eye - A.entries[None]).reshape(mu.size, d * d)
        blocks = [(rule.weights * mu ** _KERNEL_POWER[k](alpha))[:, None] * res for k in names]
        prod = E @ np.hstack(blocks)
        width = res.shape[1]
        for i, k in enumerate(names):
            vals = prod[:, i * width:(i + 1) * width]
            out[k][sel] = vals if basis.modal else vals.reshape(-1, d, d)
    return out


def _propagator(A, alpha, t, spec, config, name):
    if not (t > 0):
        raise ValueError("t must be positive")
    if not (0 < alpha < 2):
        raise ValueError("alpha must lie in (0, 2)")
    _theta_max(A, alpha)
    basis = _Basis(np.linalg.eigvals(A.entries))
    K = _kernels(A, alpha, basis, np.array([float(t)]), float(t), [name], spec, config)[name]
    return K[0]


def propagator_S(
    A: MatrixOperator,
    alpha: float,
    t: float,
    spec: ContourSpec | None = None,
    *,
    config: QuadratureConfig = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """``S(t) = 1/(2 pi i) int e^{mu t} (mu^alpha - A)^{-1} dmu`` as a dense matrix.

    ``spec`` fixes the ray angle (and a minimum radius); by default both
    are chosen to keep the spectrum well to the left of the path.
    """
    return _propagator(A, alpha, t, spec, config, "S")


def propagator_H(
    A: MatrixOperator,
    alpha: float,
    t: float,
    spec: ContourSpec | None = None,
    *,
    config: QuadratureConfig = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """``H(t) = 1/(2 pi i) int e^{mu t} mu^{alpha-1} (mu^alpha - A)^{-1} dmu``."""
    return _propagator(A, alpha, t, spec, config, "H")


# -- solve ----------------------------------------------------------------------


def _apply(K: np.ndarray, x: np.ndarray, modal: bool) -> np.ndarray:
    return K * x[None, :] if modal else K @ x


def _matrix_hat_convolution(q, qp, f, h):
    # hat_convolution with full matrix kernels, one column of f at a time
    n, d = f.shape[0] - 1, f.shape[1]
    out = np.zeros(f.shape, dtype=complex)
    for l in range(d):
        if not np.any(f[:, l]):
            continue
        out[1:] += qp[1:, :, l] * f[0, l] + q[1:, :, l] * ((f[1, l] - f[0, l]) / h)
        if n >= 2:
            d2 = (f[:-2, l] - 2.0 * f[1:-1, l] + f[2:, l]) / h
            if np.any(d2):
                out[2:] += fftconvolve(q[1:n, :, l], d2[:, None], axes=0)[: n - 1]
    return out


def _solution_exponents(p: ProblemSpec, f: SampledPath) -> list[float]:
    a = p.alpha
    ks = range(0, 5)
    ex: list[float] = []
    if p.kind == "caputo":
        ex += [a * k for k in range(1, 5)]
        if p.u1 is not None:
            ex += [a * k + 1 for k in range(1, 5)]
    if p.kind == "riemann_liouville":
        ex += [a * k + a - 1 for k in ks]
    if np.any(f.values):
        for g in (0.0, 1.0) + f.exponents:
            ex += [a * (k + 1) + g for k in ks]
    return ex


def solve(
    p: ProblemSpec,
    grid_n: int | None = None,
    spec: ContourSpec | None = None,
    *,
    config: QuadratureConfig = DEFAULT_QUADRATURE,
    check: bool = True,
) -> SolutionBundle:
    """Evaluate the representation formula on ``grid_n + 1`` uniform times.

    ``caputo``: ``u = H u0 + H1 u1 + S * f``; ``riemann_liouville``:
    ``u = S g0 + S * f``; ``abstract``: ``u = S * f``.  With ``check`` and a
    regularity target set, failed compatibility conditions raise a
    :class:`CompatibilityWarning` but the solution is still returned.
    """
    n = p.default_grid() if grid_n is None else int(grid_n)
    f = p.forcing_path(n)
    A = p.A
    d = A.dim
    h = f.step
    times = f.times
    basis = _basis(A)
    modal = basis.modal

    names = []
    if p.kind == "caputo":
        names.append("H")
        if p.u1 is not None:
            names.append("H1")
    if p.kind == "riemann_liouville":
        names.append("S")
    has_f = bool(np.any(f.values))
    if has_f:
        names += ["Q1", "Q2"]

    def coords(x):
        return basis.Vinv @ x if modal else x

    u_c = np.zeros((n + 1, d), dtype=complex)
    if names:
        K = _kernels(A, p.alpha, basis, times, p.t_end, names, spec, config)
        if p.kind == "caputo":
            u_c += _apply(K["H"], coords(p.u0), modal)
            if p.u1 is not None:
                u_c += _apply(K["H1"], coords(p.u1), modal)
        if p.kind == "riemann_liouville":
            S = K["S"]
            S[0] = 0.0
            u_c += _apply(S, coords(p.g0), modal)
        if has_f:
            fc = f.values @ basis.Vinv.T if modal else f.values
            if modal:
                u_c += hat_convolution(K["Q2"], K["Q1"], fc, h)
            else:
                u_c += _matrix_hat_convolution(K["Q2"], K["Q1"], fc, h)
    u_vals = u_c @ basis.V.T if modal else u_c
    if p.kind == "caputo":
        u_vals[0] = p.u0
    exps = _solution_exponents(p, f)
    u = SampledPath(p.t_end, u_vals, exps)
    Au = SampledPath(p.t_end, A.apply(u_vals), exps)
    frac = SampledPath(p.t_end, Au.values + f.values, exps)
    bundle = SolutionBundle(u, frac, Au, 0.0)
    resid = residual_check(bundle, p)
    diag = (estimate_holder_exponent(frac, report=True), estimate_holder_exponent(Au, report=True))
    compat = None
    if check and (p.beta_target is not None or p.theta_target is not None):
        compat = compatibility_report(p, grid_n=n)
        if not compat.overall:
            failed = ", ".join(e.id for e in compat.entries if not e.verdict)
            warnings.warn(f"compatibility conditions fail: {failed}", CompatibilityWarning, stacklevel=2)
    return SolutionBundle(u, frac, Au, resid, diag, compat)


def residual_check(b: SolutionBundle, p: ProblemSpec) -> float:
    """``sup ||D u - A u - f||`` with ``D`` recomputed by product integration.

    The first 2% of the grid is excluded; the derivative is the Caputo one
    for ``caputo`` problems and the Riemann-Liouville one otherwise.
    """
    u = b.u
    n = u.n_intervals
    if not np.any(u.values):
        deriv = np.zeros_like(u.values)
    elif p.kind == "caputo":
        deriv = caputo_derivative(u, p.alpha).values
    else:
        deriv = rl_derivative(u, p.alpha).values
    f = p.forcing_path(n).values
    r = deriv - p.A.apply(u.values) - f
    start = max(1, int(math.ceil(0.02 * n)))
    return float(np.max(np.abs(r[start:])))


# -- compatibility ----------------------------------------------------------------


@dataclass(frozen=True)
class CompatibilityEntry:
    """One condition: ``value`` is compared against ``threshold``."""

    id: str
    locus: str
    value: float
    threshold: float
    verdict: bool
    detail: str = ""
    sweep: tuple[float, ...] = ()

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "locus": self.locus,
            "value": _json_float(self.value),
            "threshold": _json_float(self.threshold),
            "verdict": bool(self.verdict),
            "detail": self.detail,
        }


@dataclass(frozen=True)
class CompatibilityReport:
    entries: list[CompatibilityEntry]

    @property
    def overall(self) -> bool:
        return all(e.verdict for e in self.entries)

    def as_list(self) -> list[dict]:
        return [e.as_dict() for e in self.entries]

    def entry(self, cid: str) -> CompatibilityEntry:
        for e in self.entries:
            if e.id == cid:
                return e
        raise KeyError(cid)


def _interp_entry(cid, locus, problems, vec_of, theta) -> CompatibilityEntry:
    """Interpolation-norm condition, judged on a refinement sweep if one is given.

    With several problems the verdict asks the norm to grow by less than a
    factor 2 from the coarsest to the finest operator.  With one problem the
    maximizing ``t`` is converted to the eigenvalue scale it probes,
    ``t (1 - theta) / theta``; the verdict fails when that scale sits near the
    top of the spectrum (above ``0.1 ||A||``) and far above its bottom (ten
    times the smallest nonzero modulus).  Vectors carried by the top of a
    spread-out spectrum are the finite-dimensional shadow of non-membership.
    """
    vals = []
    argmaxes = []
    for q in problems:
        x = vec_of(q)
        if x is None or not np.any(x):
            vals.append(0.0)
            argmaxes.append(0.0)
            continue
        if theta >= 1.0:
            vals.append(float(np.max(np.abs(q.A.apply(x)))))
            argmaxes.append(0.0)
            continue
        v, targ, _ = interp_norm(q.A, theta, x, full_output=True)
        vals.append(v)
        argmaxes.append(targ / max(q.A.norm, 1e-300))
    value = vals[-1]
    if len(problems) > 1:
        growth = vals[-1] / vals[0] if vals[0] > 0 else (1.0 if vals[-1] == 0 else math.inf)
        ok = math.isfinite(growth) and growth < 2.0
        detail = "sweep norms " + ", ".join(f"{v:.4g}" for v in vals) + f"; growth {growth:.3g}"
        return CompatibilityEntry(cid, locus, value, 2.0, ok, detail, tuple(vals))
    q = problems[-1]
    scale = argmaxes[-1] * (1.0 - theta) / theta if theta < 1.0 else 0.0
    mods = np.abs(np.linalg.eigvals(q.A.lambda0 * np.eye(q.A.dim) - q.A.entries))
    norm = max(q.A.norm, 1e-300)
    nz = mods[mods > 1e-12 * norm]
    bottom = float(nz.min()) / norm if nz.size else 1.0
    ok = math.isfinite(value) and not (scale > 0.1 and scale > 10.0 * bottom)
    detail = (f"theta={theta:.4g}; probed eigenvalue scale {scale:.3g} ||A||, "
              f"spectrum bottom {bottom:.3g} ||A||")
    return CompatibilityEntry(cid, locus, value, 0.1, ok, detail)


def _holder_entry(f: SampledPath, beta: float) -> CompatibilityEntry:
    rep = estimate_holder_exponent(f, report=True)
    m = 1 if beta > 1 else 0
    b = beta - m if beta != 1 else 1.0
    semi = holder_seminorm(f, b, m) if b > 0 else 0.0
    ok = rep.degenerate or rep.fitted_exponent >= beta - 0.07
    detail = f"fitted exponent {rep.fitted_exponent:.3g}" if not rep.degenerate else "constant forcing"
    return CompatibilityEntry("f_holder", f"f in C^{beta:g}([0,T];X)", semi, beta, ok, detail)


def compatibility_report(
    p: ProblemSpec,
    *,
    grid_n: int | None = None,
    sweep: Sequence[ProblemSpec] | None = None,
) -> CompatibilityReport:
    """Evaluate the compatibility conditions for ``p.beta_target`` or ``p.theta_target``.

    ``sweep`` optionally lists the same problem on refined operators
    (coarsest first, ``p`` itself is not added); interpolation-space
    conditions are then judged by their growth along the sweep.
    """
    beta, theta = p.beta_target, p.theta_target
    if beta is None and theta is None:
        raise ValueError("set beta_target or theta_target")
    problems = list(sweep) if sweep else [p]
    n = p.default_grid() if grid_n is None else grid_n
    a = p.alpha
    entries: list[CompatibilityEntry] = []
    fcache: dict[int, SampledPath] = {}

    def fpath(q):
        key = id(q)
        if key not in fcache:
            fcache[key] = q.forcing if isinstance(q.forcing, SampledPath) else q.forcing_path(n)
        return fcache[key]

    def f0(q):
        return fpath(q).values[0]

    def f1(q):
        return initial_derivative(fpath(q))

    if beta is not None:
        entries.append(_holder_entry(fpath(p), beta))
        if p.kind in ("abstract", "riemann_liouville"):
            for k in (0, 1):
                if k < beta:
                    get = f0 if k == 0 else f1
                    entries.append(_interp_entry(
                        f"f{k}_interp", f"f^({k})(0) in (X,D(A))_{{(beta-{k})/alpha,inf}}",
                        problems, get, (beta - k) / a))
            if p.kind == "riemann_liouville":
                if beta < a - 1:
                    entries.append(_interp_entry(
                        "g0_interp", "g0 in (X,D(A))_{(beta+1)/alpha,inf}",
                        problems, lambda q: q.g0, (beta + 1) / a))
                elif beta > a - 1:
                    g = float(np.max(np.abs(p.g0)))
                    entries.append(CompatibilityEntry(
                        "g0_zero", "g0 = 0 when beta > alpha - 1", g, 0.0, g == 0.0,
                        "hard condition" if g else ""))
        else:
            entries.append(_interp_entry(
                "Au0_f0_interp", "A u0 + f(0) in (X,D(A))_{beta/alpha,inf}",
                problems, lambda q: q.A.apply(q.u0) + f0(q), beta / a))
            if a > 1:
                if beta < 1:
                    entries.append(_interp_entry(
                        "u1_interp", "u1 in (X,D(A))_{1-(1-beta)/alpha,inf}",
                        problems, lambda q: q.u1, 1.0 - (1.0 - beta) / a))
                elif beta > 1:
                    entries.append(_interp_entry(
                        "Au1_f1_interp", "A u1 + f'(0) in (X,D(A))_{(beta-1)/alpha,inf}",
                        problems, lambda q: q.A.apply(q.u1) + f1(q), (beta - 1) / a))
    if theta is not None:
        # f bounded with values in the interpolation space: check a time subsample
        def f_sup(q):
            fp = fpath(q)
            idx = np.unique(np.linspace(0, fp.n_intervals, 9).astype(int))
            best = None
            for i in idx:
                v = fp.values[i]
                if best is None or np.max(np.abs(v)) > np.max(np.abs(best)):
                    best = v
            return best

        entries.append(_interp_entry("f_bounded", "f bounded in (X,D(A))_{theta,inf}",
                                     problems, f_sup, theta))
        if p.kind == "caputo":
            entries.append(_interp_entry("Au0_interp", "A u0 in (X,D(A))_{theta,inf}",
                                         problems, lambda q: q.A.apply(q.u0), theta))
            if a > 1:
                if theta < 1.0 / a:
                    entries.append(_interp_entry(
                        "u1_interp_theta", "u1 in (X,D(A))_{theta+1-1/alpha,inf}",
                        problems, lambda q: q.u1, theta + 1.0 - 1.0 / a))
                else:
                    entries.append(_interp_entry(
                        "Au1_interp_theta", "A u1 in (X,D(A))_{theta-1/alpha,inf}",
                        problems, lambda q: q.A.apply(q.u1), theta - 1.0 / a))
    return CompatibilityReport(entries)


# -- regularity ---------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityReport:
    exponent_frac_deriv: float
    exponent_Au: float
    threshold: float
    passed: bool
    reports: tuple[HolderReport, HolderReport] = field(repr=False, default=None)


def regularity_verifier(b: SolutionBundle, beta: float, slack: float = 0.07) -> RegularityReport:
    """Fitted Hölder exponents of ``frac_deriv`` and ``A u`` against ``beta - slack``.

    A degenerate fit (constant path) counts as passing.
    """
    reps = tuple(estimate_holder_exponent(x, report=True) for x in (b.frac_deriv, b.Au))
    thr = beta - slack
    ok = all(r.degenerate or r.fitted_exponent >= thr for r in reps)
    return RegularityReport(reps[0].fitted_exponent, reps[1].fitted_exponent, thr, ok, reps)
