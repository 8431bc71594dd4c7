"""Acceptance checks, runnable from the CLI (``fracreg selftest``) and from pytest."""

from __future__ import annotations

import json
import math
import tempfile
import time
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.special import gamma as sgamma

from .errors import CompatibilityWarning
from .fraccli import ScenarioConfig, build_neumann_laplacian, run_scenario
from .fracops import SampledPath, frac_integral, rl_derivative
from .opalgebra import MatrixOperator, eig_oracle
from .solver import (
    ProblemSpec,
    compatibility_report,
    propagator_H,
    propagator_S,
    regularity_verifier,
    solve,
)
from .specfun import MlParams, mittag_leffler, mittag_leffler_array, mittag_leffler_series

__all__ = ["CriterionResult", "CRITERIA", "run_all"]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def ml_cross_validation() -> tuple[bool, str]:
    t0 = time.perf_counter()
    worst = 0.0
    for a in (0.4, 0.7, 1.0, 1.3, 1.6, 1.9):
        p = MlParams(a, a)
        for z in (-10, -5, -2, -1, 0, 1, 2):
            s = mittag_leffler_series(p, z)
            c = mittag_leffler(p, z, method="contour")
            worst = max(worst, abs(s - c))
    dt = time.perf_counter() - t0
    return worst <= 1e-8 and dt < 5.0, f"max |series - contour| = {worst:.2e}, {dt:.2f}s"


def power_rule_check() -> tuple[bool, str]:
    worst = 0.0
    for d, a in ((1.0, 0.5), (1.7, 0.7), (1.5, 1.3)):
        f = SampledPath.from_function(lambda t, d=d: t**d, 1.0, 2048, exponents=[d])
        r = rl_derivative(f, a)
        t = f.times
        ex = sgamma(d + 1) / sgamma(d + 1 - a) * t ** (d - a)
        m = t >= 0.1
        worst = max(worst, float(np.max(np.abs(r.values[m, 0] - ex[m]) / np.abs(ex[m]))))
    return worst <= 1e-4, f"max relative error = {worst:.2e}"


def semigroup_order() -> tuple[bool, str]:
    errs = []
    for n in (256, 512, 1024, 2048):
        f = SampledPath.from_function(lambda t: np.sin(t) + 1.0, 1.0, n)
        two = frac_integral(frac_integral(f, 0.7), 0.3)
        one = frac_integral(f, 1.0)
        errs.append(float(np.max(np.abs(two.values - one.values))))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(3)]
    return min(orders) >= 1.8, "orders " + ", ".join(f"{o:.2f}" for o in orders)


def scalar_solver() -> tuple[bool, str]:
    A = MatrixOperator.scalar(-1.0, phi=0.95 * math.pi)
    worst = 0.0
    cases = [(0.5, [1.0], None, 1.0), (1.5, [1.0], [0.0], 1.0), (1.5, [0.0], [1.0], 2.0)]
    for a, u0, u1, beta in cases:
        b = solve(ProblemSpec(a, "caputo", A, u0=u0, u1=u1), 2048)
        t = b.u.times
        ref = mittag_leffler_array(a, beta, -t**a)
        if beta == 2.0:
            ref = t * ref
        m = t >= 0.05
        worst = max(worst, float(np.max(np.abs(b.u.values[m, 0] - ref[m]) / np.abs(ref[m]))))
    return worst <= 1e-6, f"max relative error = {worst:.2e}"


def matrix_vs_modes() -> tuple[bool, str]:
    A = build_neumann_laplacian(16)
    vals, V = eig_oracle(A)
    u0 = np.random.default_rng(1).normal(size=16)
    b = solve(ProblemSpec(0.8, "caputo", A, u0=u0), 1024, check=False)
    t = b.u.times
    c = (V.conj().T * A.weights) @ u0
    ref = (np.stack([mittag_leffler_array(0.8, 1.0, lam * t**0.8) for lam in vals], axis=1) * c) @ V.T
    err = float(np.max(np.abs(b.u.values - ref)) / np.max(np.abs(ref)))
    return err <= 1e-6, f"relative error = {err:.2e}"


def propagator_slopes() -> tuple[bool, str]:
    ts = np.logspace(-3, -1, 9)
    lt = np.log(ts)
    A = build_neumann_laplacian(16)
    # H(t)u0 - u0 ~ t^alpha A u0 only while |lambda| t^alpha << 1; a unit eigenvalue keeps
    # the whole window in that regime
    scalar = MatrixOperator.scalar(-1.0, phi=0.95 * math.pi)
    ok = True
    parts = []
    for a in (0.5, 1.5):
        s_norm = [np.linalg.norm(propagator_S(A, a, t), 2) for t in ts]
        h_gap = [abs(propagator_H(scalar, a, t)[0, 0] - 1.0) for t in ts]
        ks = np.polyfit(lt, np.log(s_norm), 1)[0]
        kh = np.polyfit(lt, np.log(h_gap), 1)[0]
        ok &= abs(ks - (a - 1)) <= 0.05 and abs(kh - a) <= 0.1
        parts.append(f"alpha={a}: S slope {ks:.3f}, H slope {kh:.3f}")
    return bool(ok), "; ".join(parts)


def rl_boundary() -> tuple[bool, str]:
    A = MatrixOperator.scalar(-1.0, phi=0.95 * math.pi)
    b = solve(ProblemSpec(1.5, "riemann_liouville", A, g0=[1.0]), 2048)
    trace = rl_derivative(b.u, 0.5)
    err = abs(trace.values[1, 0] - 1.0)
    ok = err <= 1e-4 and b.residual_sup <= 1e-4
    return ok, f"|B^(alpha-1)u(t1) - g0| = {err:.2e}, residual {b.residual_sup:.2e}"


def compatibility_trichotomy() -> tuple[bool, str]:
    alpha, beta = 1.5, 0.3
    sizes = (32, 64, 128)

    def problems(shape):
        out = []
        for n in sizes:
            s = np.linspace(0.0, 1.0, n)
            out.append(ProblemSpec(alpha, "caputo", build_neumann_laplacian(n), u0=np.zeros(n),
                                   u1=shape(s), beta_target=beta))
        return out

    smooth = problems(lambda s: np.cos(np.pi * s))
    cusp = problems(lambda s: np.abs(s - 0.5) ** 0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CompatibilityWarning)
        rep_s = compatibility_report(smooth[-1], grid_n=512, sweep=smooth)
        rep_c = compatibility_report(cusp[-1], grid_n=512, sweep=cusp)
        reg_s = regularity_verifier(solve(smooth[-1], 512, check=False), beta)
        reg_c = regularity_verifier(solve(cusp[-1], 512, check=False), beta)
    norms = rep_c.entry("u1_interp").sweep
    growth = norms[-1] / norms[0]
    smooth_exp = min(reg_s.exponent_frac_deriv, reg_s.exponent_Au)
    cusp_exp = min(reg_c.exponent_frac_deriv, reg_c.exponent_Au)
    ok = (rep_s.overall and smooth_exp >= 0.23 and growth >= 2.0 and beta - cusp_exp >= 0.1)
    detail = (f"eigenmode compatible={rep_s.overall}, exponent {smooth_exp:.3f}; "
              f"cusp growth {growth:.2f}x, exponent {cusp_exp:.3f}")
    return ok, detail


def conservation() -> tuple[bool, str]:
    with tempfile.TemporaryDirectory() as tmp:
        cfg = ScenarioConfig(alpha=0.8, phi=0.0, spatial_n=32, grid_n=512,
                             u0={"type": "cusp", "gamma": 0.5, "s0": 0.3}, out=str(Path(tmp) / "run"))
        status = run_scenario(cfg, log=lambda *_: None)
        diag = json.loads((Path(tmp) / "run" / "diagnostics.json").read_text())
    drift = float(diag["mass_drift"])
    return status == 0 and drift <= 1e-8, f"mass drift {drift:.2e}"


def zero_data() -> tuple[bool, str]:
    A = build_neumann_laplacian(16)
    z = np.zeros(16)
    worst = 0.0
    for p in (ProblemSpec(0.7, "abstract", A),
              ProblemSpec(1.5, "caputo", A, u0=z, u1=z),
              ProblemSpec(1.5, "riemann_liouville", A, g0=z)):
        b = solve(p, 256, check=False)
        worst = max(worst, float(np.max(np.abs(b.u.values))))
    return worst <= 1e-10, f"max |u| = {worst:.2e}"


CRITERIA: list[tuple[int, str, Callable[[], tuple[bool, str]]]] = [
    (1, "Mittag-Leffler series vs contour", ml_cross_validation),
    (2, "power rule", power_rule_check),
    (3, "semigroup order", semigroup_order),
    (4, "scalar solver vs Mittag-Leffler", scalar_solver),
    (5, "matrix solver vs modal oracle", matrix_vs_modes),
    (6, "propagator asymptotics", propagator_slopes),
    (7, "Riemann-Liouville boundary datum", rl_boundary),
    (8, "compatibility trichotomy", compatibility_trichotomy),
    (9, "mass conservation", conservation),
    (10, "zero data", zero_data),
]


def run_one(number: int) -> CriterionResult:
    num, name, fn = CRITERIA[number - 1]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed criterion, reported rather than raised
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CriterionResult(num, name, bool(ok), detail, time.perf_counter() - t0)


def run_all(log: Callable[[str], None] | None = print) -> list[CriterionResult]:
    results = []
    for num, _, _ in CRITERIA:
        r = run_one(num)
        if log is not None:
            log(r.line())
        results.append(r)
    return results
