"""Finite-dimensional operators: resolvents, sector scans, interpolation norms."""

from __future__ import annotations

import json
import math
import threading
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import NonNormalError, SingularityError

__all__ = [
    "MatrixOperator",
    "SectorReport",
    "resolve",
    "sectoriality_scan",
    "interp_norm",
    "default_t_grid",
    "eig_oracle",
]


@dataclass(frozen=True, eq=False)
class MatrixOperator:
    """Dense complex matrix ``A`` with sector data ``(lambda0, phi)``.

    ``weights`` (optional, positive) defines the inner product
    ``<x, y> = sum w_i x_i conj(y_i)`` in which ``A`` is normal; this covers
    discretizations that are self-adjoint only for a quadrature-weighted
    inner product.
    """

    entries: np.ndarray
    lambda0: float = 0.0
    phi: float = math.pi / 2
    weights: np.ndarray | None = None
    _lu_cache: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=complex)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"entries must be a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("entries must be finite")
        if not (self.lambda0 >= 0):
            raise ValueError(f"lambda0 must be nonnegative, got {self.lambda0!r}")
        if not (0 < self.phi < math.pi):
            raise ValueError(f"phi must lie in (0, pi), got {self.phi!r}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        if self.weights is not None:
            w = np.array(self.weights, dtype=float)
            if w.shape != (a.shape[0],) or np.any(w <= 0):
                raise ValueError("weights must be a positive vector of length dim")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))

    @classmethod
    def scalar(cls, w: complex, **kw) -> "MatrixOperator":
        return cls(np.array([[w]], dtype=complex), **kw)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``A x`` for a vector or for a stack of vectors along the last axis."""
        return np.asarray(x) @ self.entries.T

    def lu(self, lam: complex):
        """Cached LU factors of ``lam - A``."""
        key = complex(lam)
        with self._lock:
            hit = self._lu_cache.get(key)
        if hit is not None:
            return hit
        mat = key * np.eye(self.dim) - self.entries
        with np.errstate(all="ignore"), warnings.catch_warnings():
            # exact singularity is reported below as SingularityError
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(mat, check_finite=False)
        diag = np.abs(np.diag(lu))
        scale = max(abs(key), self.norm, 1e-300)
        if not np.all(np.isfinite(lu)) or diag.min() <= 1e-14 * scale:
            raise SingularityError(f"lambda = {key} is (numerically) in the spectrum")
        with self._lock:
            if len(self._lu_cache) > 4096:
                self._lu_cache.clear()
            self._lu_cache[key] = (lu, piv)
        return lu, piv

    def to_json(self, path) -> None:
        """Write ``{dim, entries: [[re, im], ...], lambda0, phi}``."""
        doc = {
            "dim": self.dim,
            "entries": [[[float(v.real), float(v.imag)] for v in row] for row in self.entries],
            "lambda0": self.lambda0,
            "phi": self.phi,
        }
        if self.weights is not None:
            doc["weights"] = [float(w) for w in self.weights]
        Path(path).write_text(json.dumps(doc, indent=1))

    @classmethod
    def from_json(cls, source) -> "MatrixOperator":
        """Load from a JSON path or an already parsed mapping."""
        doc = source if isinstance(source, dict) else json.loads(Path(source).read_text())
        raw = np.asarray(doc["entries"], dtype=float)
        if raw.ndim == 3:
            ent = raw[..., 0] + 1j * raw[..., 1]
        else:
            ent = raw.astype(complex)
        if "dim" in doc and ent.shape != (doc["dim"], doc["dim"]):
            raise ValueError("entries do not match dim")
        return cls(ent, float(doc.get("lambda0", 0.0)), float(doc.get("phi", math.pi / 2)),
                   doc.get("weights"))

    @classmethod
    def from_csv(cls, path, lambda0: float = 0.0, phi: float = math.pi / 2) -> "MatrixOperator":
        """Dense CSV; complex entries may be written as Python literals (``1+2j``)."""
        rows = [line.strip() for line in Path(path).read_text().splitlines() if line.strip()]
        ent = np.array([[complex(v.strip().replace(" ", "")) for v in r.split(",")] for r in rows])
        return cls(ent, lambda0, phi)


def resolve(A: MatrixOperator, lam: complex, b: np.ndarray) -> np.ndarray:
    """Solve ``(lam - A) x = b``; ``b`` may have extra trailing columns."""
    lu, piv = A.lu(lam)
    x = sla.lu_solve((lu, piv), np.asarray(b, dtype=complex), check_finite=False)
    return x


@dataclass(frozen=True)
class SectorReport:
    """Per-ray resolvent suprema ``sup ||(lam - lambda0)(lam - A)^{-1}||``.

    ``rays`` holds ``(angle, sup)`` pairs; ``admissible`` maps the requested
    ``(phi, eps)`` to the verdict.
    """

    rays: list[tuple[float, float]]
    admissible: dict[tuple[float, float], bool]
    profiles: dict[float, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def bound(self) -> float:
        """Estimated ``M(eps)``: the largest supremum over all rays."""
        return max(v for _, v in self.rays)


def sectoriality_scan(
    A: MatrixOperator,
    phi: float,
    eps: float,
    mag_grid: Sequence[float],
    n_interior: int = 6,
) -> SectorReport:
    """Sample ``||(lam - lambda0)(lam - A)^{-1}||`` on rays ``|arg(lam - lambda0)| <= phi - eps``.

    The verdict requires every supremum to stay below ``1e6`` and the profile
    along each ray not to grow over the top decade of ``mag_grid``.  Besides
    ``n_interior + 2`` uniform rays and the positive real axis, every
    eigenvalue of ``A - lambda0`` inside the sector gets its own ray through it.
    """
    if not (0 < eps < phi < math.pi):
        raise ValueError("need 0 < eps < phi < pi")
    mags = np.sort(np.asarray(mag_grid, dtype=float))
    if mags.size == 0 or np.any(mags <= 0):
        raise ValueError("mag_grid must be positive")
    edge = phi - eps
    angles = set(np.round(np.concatenate([[0.0], np.linspace(-edge, edge, n_interior + 2)]), 14))
    # spectrum inside the sector is the typical failure; uniform rays can step over it
    shifted = np.linalg.eigvals(A.entries) - A.lambda0
    spectral: dict[float, list[float]] = {}
    for w in shifted:
        if abs(w) > 0 and abs(np.angle(w)) <= edge:
            spectral.setdefault(float(np.round(np.angle(w), 14)), []).append(float(abs(w)))
    angles = sorted(angles | set(spectral))
    rays = []
    profiles = {}
    ok = True
    eye = np.eye(A.dim)
    for ang in angles:
        ray_mags = np.sort(np.concatenate([mags, spectral.get(ang, [])]))
        vals = np.empty(ray_mags.size)
        for i, m in enumerate(ray_mags):
            lam = A.lambda0 + m * complex(math.cos(ang), math.sin(ang))
            try:
                r = np.linalg.solve(lam * eye - A.entries, eye)
                vals[i] = m * np.linalg.norm(r, 2)
            except np.linalg.LinAlgError:
                vals[i] = math.inf
        sup = float(np.max(vals))
        rays.append((float(ang), sup))
        profiles[float(ang)] = vals
        if not (sup <= 1e6):
            ok = False
            continue
        if ang in spectral:
            # judged by its supremum only; the growth test belongs to the regular grid
            continue
        top = mags >= mags[-1] / 10.0
        if np.count_nonzero(top) >= 2 and vals[top][-1] > 1.05 * vals[top][0] and vals[top][-1] > 1.0 + 1e-9:
            # still climbing at the large end of the grid
            ok = False
    return SectorReport(rays, {(float(phi), float(eps)): ok}, profiles)


def default_t_grid(A: MatrixOperator, per_decade: int = 12) -> np.ndarray:
    """Log-spaced grid spanning ``1e-4 ||A||`` to ``1e4 ||A||``."""
    scale = max(A.norm + A.lambda0, 1.0)
    return np.logspace(math.log10(1e-4 * scale), math.log10(1e4 * scale), 8 * per_decade + 1)


def interp_norm(
    A: MatrixOperator,
    theta: float,
    x: np.ndarray,
    t_grid: Sequence[float] | None = None,
    *,
    full_output: bool = False,
):
    """Equivalent norm on ``(X, D(A))_{theta,infty}``.

    With ``A_s = lambda0 - A`` this is ``max(||x||, sup_t t^theta ||A_s (t + A_s)^{-1} x||)``
    over ``t_grid`` (sup norms throughout).  With ``full_output`` the maximizing
    ``t`` and the profile are returned as well.
    """
    if not (0 < theta < 1):
        raise ValueError(f"theta must lie in (0, 1), got {theta!r}")
    ts = default_t_grid(A) if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(ts <= 0):
        raise ValueError("t_grid must be positive")
    x = np.asarray(x, dtype=complex)
    base = float(np.max(np.abs(x))) if x.size else 0.0
    profile = np.empty(ts.size)
    for i, t in enumerate(ts):
        # A_s (t + A_s)^{-1} x = x - t (t + A_s)^{-1} x, with t + A_s = (t + lambda0) - A
        y = resolve(A, t + A.lambda0, x)
        profile[i] = t**theta * float(np.max(np.abs(x - t * y)))
    k = int(np.argmax(profile))
    value = max(base, float(profile[k]))
    if full_output:
        return value, float(ts[k]), profile
    return value


def eig_oracle(A: MatrixOperator, tol: float = 1e-10):
    """Eigen-decomposition of a normal operator.

    Returns ``(eigenvalues, V)`` with ``A = V diag(eigenvalues) V^{-1}``; for
    the plain inner product ``V`` is unitary, for a weighted one it is
    orthonormal in that inner product.  Raises :class:`NonNormalError`
    otherwise.
    """
    a = A.entries
    if A.weights is None:
        s = a
    else:
        d = np.sqrt(A.weights)
        s = d[:, None] * a / d[None, :]
    scale = max(float(np.linalg.norm(s, 2)) ** 2, 1e-300)
    comm = s @ s.conj().T - s.conj().T @ s
    if np.linalg.norm(comm, 2) > tol * scale:
        raise NonNormalError("operator is not normal in its inner product")
    if np.allclose(s, s.conj().T, atol=tol * math.sqrt(scale)):
        vals, vecs = np.linalg.eigh((s + s.conj().T) / 2)
        vals = vals.astype(complex)
    else:
        tform, z = sla.schur(s, output="complex")
        vals, vecs = np.diag(tform).copy(), z
    if A.weights is not None:
        vecs = vecs / np.sqrt(A.weights)[:, None]
    return vals, vecs
