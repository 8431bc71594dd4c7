"""Command line interface and the Neumann-Laplacian diffusion scenario."""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .contour import DEFAULT_QUADRATURE, QuadratureConfig, build_keyhole
from .errors import CompatibilityWarning, FracRegError, SectorError
from .fracops import SampledPath, caputo_derivative, frac_integral, rl_derivative
from .opalgebra import MatrixOperator
from .solver import ProblemSpec, compatibility_report, regularity_verifier, solve
from .specfun import MlParams, mittag_leffler

__all__ = [
    "ScenarioConfig",
    "build_neumann_laplacian",
    "neumann_weights",
    "weighted_mean",
    "profile",
    "run_scenario",
    "main",
]

SECTOR_MARGIN = 0.01
LAMBDA0 = 1e-3


def neumann_weights(n: int) -> np.ndarray:
    """Trapezoid weights on ``n`` equispaced points of ``[0, 1]``."""
    w = np.full(n, 1.0 / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def weighted_mean(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Trapezoid mean over the last axis."""
    return (np.asarray(u) @ w) / w.sum()


def build_neumann_laplacian(n: int, rotation_phi: float = 0.0) -> MatrixOperator:
    """``e^{i phi}`` times the second difference on ``n`` points with ghost-point Neumann rows.

    The matrix is self-adjoint for the trapezoid inner product, which is
    recorded as the operator's weights.
    """
    if n < 3:
        raise ValueError("need at least 3 points")
    if not (abs(rotation_phi) < math.pi - SECTOR_MARGIN):
        raise SectorError("rotation angle leaves no sector")
    h = 1.0 / (n - 1)
    a = np.zeros((n, n))
    i = np.arange(1, n - 1)
    a[i, i - 1] = 1.0
    a[i, i] = -2.0
    a[i, i + 1] = 1.0
    a[0, 0], a[0, 1] = -2.0, 2.0
    a[-1, -1], a[-1, -2] = -2.0, 2.0
    a = a * (np.exp(1j * rotation_phi) / h**2)
    phi = math.pi - abs(rotation_phi) - SECTOR_MARGIN
    return MatrixOperator(a, LAMBDA0, phi, neumann_weights(n))


def profile(desc, n: int, base_dir: Path | None = None) -> np.ndarray:
    """Spatial profile on ``n`` points of ``[0, 1]`` from a descriptor.

    ``{"type": "zero"}``, ``{"type": "constant", "value": c}``,
    ``{"type": "eigenmode", "k": k, "amplitude": a}`` (``a cos(k pi s)``),
    ``{"type": "cusp", "gamma": g, "s0": 0.5}`` (``|s - s0|^g``),
    ``{"type": "flat_cusp", "gamma": g}`` (``|cos(pi s)|^g``: Hölder class ``g``
    at ``s = 1/2`` but flat at both ends, so the Neumann condition holds),
    ``{"type": "csv", "path": file}`` (one value per line).
    """
    s = np.linspace(0.0, 1.0, n)
    if desc is None:
        return np.zeros(n, dtype=complex)
    kind = desc.get("type")
    if kind == "zero":
        return np.zeros(n, dtype=complex)
    if kind == "constant":
        return np.full(n, complex(desc.get("value", 1.0)))
    if kind == "eigenmode":
        return complex(desc.get("amplitude", 1.0)) * np.cos(int(desc["k"]) * math.pi * s).astype(complex)
    if kind == "cusp":
        g = float(desc["gamma"])
        return (np.abs(s - float(desc.get("s0", 0.5))) ** g).astype(complex)
    if kind == "flat_cusp":
        return (np.abs(np.cos(math.pi * s)) ** float(desc["gamma"])).astype(complex)
    if kind == "csv":
        path = Path(desc["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        vals = np.array([complex(x.strip()) for x in path.read_text().split() if x.strip()])
        if vals.size != n:
            raise ValueError(f"{path}: expected {n} values, got {vals.size}")
        return vals
    raise ValueError(f"unknown profile type {kind!r}")


@dataclass
class ScenarioConfig:
    """Time-fractional diffusion with a rotated Neumann Laplacian (Caputo kind).

    ``sweep_n`` optionally lists coarser-to-finer spatial sizes for the
    refinement check of the interpolation-space conditions.
    """

    alpha: float = 0.8
    phi: float = 0.0
    beta_target: float | None = None
    theta_target: float | None = None
    spatial_n: int = 32
    t_end: float = 1.0
    grid_n: int = 512
    u0: dict | None = field(default_factory=lambda: {"type": "eigenmode", "k": 1})
    u1: dict | None = None
    forcing: dict | None = None
    out: str = "diffuse_out"
    sweep_n: list[int] = field(default_factory=list)
    frames: int = 11

    def __post_init__(self) -> None:
        if not (0 < self.alpha < 2) or self.alpha == 1.0:
            raise ValueError("alpha must lie in (0, 2) without 1")
        if not (abs(self.phi) < (2.0 - self.alpha) * math.pi / 2):
            raise SectorError(f"|phi| must stay below (2 - alpha) pi / 2 = {(2 - self.alpha) * math.pi / 2:.4f}")
        if self.spatial_n < 8:
            raise ValueError("spatial_n must be at least 8")
        if self.grid_n < 8:
            raise ValueError("grid_n must be at least 8")

    @classmethod
    def from_json(cls, source) -> "ScenarioConfig":
        doc = source if isinstance(source, dict) else json.loads(Path(source).read_text())
        known = set(cls.__dataclass_fields__)
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown scenario keys: {sorted(extra)}")
        return cls(**doc)

    def problem(self, n: int | None = None, base_dir: Path | None = None) -> ProblemSpec:
        n = self.spatial_n if n is None else n
        A = build_neumann_laplacian(n, self.phi)
        u0 = profile(self.u0, n, base_dir)
        u1 = None
        if self.alpha > 1:
            u1 = profile(self.u1, n, base_dir) if self.u1 is not None else np.zeros(n, dtype=complex)
        forcing = None
        if self.forcing is not None and self.forcing.get("type") != "zero":
            fvec = profile(self.forcing, n, base_dir)
            forcing = lambda t, v=fvec: np.broadcast_to(v, (np.size(t), v.size))  # noqa: E731
        return ProblemSpec(self.alpha, "caputo", A, forcing=forcing, u0=u0, u1=u1, t_end=self.t_end,
                           beta_target=self.beta_target, theta_target=self.theta_target)


def _write_path_csv(path: Path, t: np.ndarray, vals: np.ndarray) -> None:
    d = vals.shape[1]
    header = ["t"] + [f"{p}_{i}" for i in range(d) for p in ("re", "im")]
    lines = [",".join(header)]
    for tk, row in zip(t, vals):
        cells = [repr(float(tk))]
        for v in row:
            cells += [repr(float(v.real)), repr(float(v.imag))]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def run_scenario(cfg: ScenarioConfig, base_dir: Path | None = None, *,
                 config: QuadratureConfig = DEFAULT_QUADRATURE, log=print) -> int:
    """Solve the scenario and write ``frames.csv``, ``plot.csv`` and ``diagnostics.json``.

    Returns 0 on success (compatibility failures only warn) and 1 on a
    sector violation or numerical failure.
    """
    out = Path(cfg.out)
    try:
        p = cfg.problem(base_dir=base_dir)
        compat = None
        if cfg.beta_target is not None or cfg.theta_target is not None:
            sweep = [cfg.problem(k, base_dir) for k in cfg.sweep_n] if cfg.sweep_n else None
            compat = compatibility_report(p, grid_n=cfg.grid_n, sweep=sweep)
            if not compat.overall:
                failed = ", ".join(e.id for e in compat.entries if not e.verdict)
                warnings.warn(f"compatibility conditions fail: {failed}", CompatibilityWarning, stacklevel=2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CompatibilityWarning)
            b = solve(p, cfg.grid_n, config=config, check=False)
    except (FracRegError, np.linalg.LinAlgError) as exc:
        log(f"error: {exc}")
        return 1
    w = p.A.weights
    t = b.u.times
    mean = weighted_mean(b.u.values, w)
    out.mkdir(parents=True, exist_ok=True)
    idx = np.unique(np.linspace(0, cfg.grid_n, max(2, cfg.frames)).round().astype(int))
    _write_path_csv(out / "frames.csv", t[idx], b.u.values[idx])
    norms = np.max(np.abs(b.u.values), axis=1)
    lines = ["t,sup_norm_u,mean_re,mean_im"]
    lines += [f"{float(tk)!r},{float(nk)!r},{float(m.real)!r},{float(m.imag)!r}" for tk, nk, m in zip(t, norms, mean)]
    (out / "plot.csv").write_text("\n".join(lines) + "\n")
    diag = b.diagnostics_dict()
    if compat is not None:
        diag["compatibility"] = compat.as_list()
    if cfg.beta_target is not None:
        reg = regularity_verifier(b, cfg.beta_target)
        diag["regularity"] = {"threshold": reg.threshold, "passed": reg.passed}
    diag["mass_trace"] = [[float(tk), float(m.real), float(m.imag)] for tk, m in zip(t, mean)]
    diag["mass_drift"] = float(np.max(np.abs(mean - mean[0])))
    diag["config"] = asdict(cfg)
    (out / "diagnostics.json").write_text(json.dumps(diag, indent=1, sort_keys=True) + "\n")
    log(f"residual_sup {b.residual_sup:.3e}  mass_drift {diag['mass_drift']:.3e}  -> {out}")
    return 0


# -- CLI ----------------------------------------------------------------------------


def _parse_complex(text: str) -> complex:
    return complex(text.replace(" ", "").replace("i", "j"))


def _quad_config(args) -> QuadratureConfig:
    kw = {}
    if getattr(args, "nodes", None) is not None:
        kw["nodes_per_unit"] = float(args.nodes)
    if getattr(args, "tol", None) is not None and args.command != "ml":
        kw["tail_tol"] = float(args.tol)
    return QuadratureConfig(**kw) if kw else DEFAULT_QUADRATURE


def _contour(args):
    if args.contour_theta is None and args.contour_radius is None:
        return None
    theta = args.contour_theta if args.contour_theta is not None else 0.6 * math.pi
    return build_keyhole(theta, args.contour_radius if args.contour_radius is not None else 1.0)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--contour-theta", type=float, dest="contour_theta")
    common.add_argument("--contour-radius", type=float, dest="contour_radius")
    common.add_argument("--nodes", type=float, help="contour nodes per unit length")
    common.add_argument("--grid-n", type=int, dest="grid_n")
    common.add_argument("--out")
    common.add_argument("--config")
    common.add_argument("--tol", type=float)

    parser = argparse.ArgumentParser(prog="fracreg", description="Fractional operators and Cauchy problems")
    sub = parser.add_subparsers(dest="command", required=True)
    ml = sub.add_parser("ml", parents=[common], help="evaluate E_{alpha,beta}(z)")
    ml.add_argument("--z", required=True, type=_parse_complex)
    ml.add_argument("--method", choices=["auto", "series", "contour"], default="auto")
    fr = sub.add_parser("frac", parents=[common], help="fractional operator on a CSV path")
    fr.add_argument("--op", choices=["integral", "rl", "caputo"], required=True)
    fr.add_argument("input", help="CSV with columns t, re_0, im_0, ...")
    sub.add_parser("solve", parents=[common], help="solve a problem JSON")
    sub.add_parser("check", parents=[common], help="compatibility report for a problem JSON")
    sub.add_parser("diffuse", parents=[common], help="run a diffusion scenario JSON")
    sub.add_parser("selftest", parents=[common], help="run the acceptance checks")
    return parser


def _fmt(v: complex) -> str:
    return repr(v.real) if v.imag == 0 else repr(v)


def _cmd_ml(args) -> int:
    if args.alpha is None or args.beta is None:
        raise _Usage("ml needs --alpha and --beta")
    p = MlParams(args.alpha, args.beta, args.tol if args.tol is not None else 1e-14)
    v = complex(mittag_leffler(p, args.z, method=args.method))
    # E is real on the real axis; drop contour round-off in the imaginary part
    print(_fmt(complex(v.real) if args.z.imag == 0 else v))
    return 0


def _cmd_frac(args) -> int:
    if args.alpha is None:
        raise _Usage("frac needs --alpha")
    f = SampledPath.from_csv(args.input)
    op = {"integral": frac_integral, "rl": rl_derivative, "caputo": caputo_derivative}[args.op]
    g = op(f, args.alpha)
    g.to_csv(args.out if args.out else sys.stdout)
    return 0


def _load_problem(args) -> ProblemSpec:
    if not args.config:
        raise _Usage("this command needs --config <problem.json>")
    p = ProblemSpec.from_json(args.config)
    changes = {}
    if args.alpha is not None:
        changes["alpha"] = args.alpha
    if args.beta is not None:
        changes["beta_target"] = args.beta
    return p.replace(**changes) if changes else p


def _cmd_solve(args) -> int:
    p = _load_problem(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CompatibilityWarning)
        b = solve(p, args.grid_n, _contour(args), config=_quad_config(args))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"residual_sup {b.residual_sup:.6e}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        b.to_csv(out / "solution.csv")
        (out / "diagnostics.json").write_text(json.dumps(b.diagnostics_dict(), indent=1, sort_keys=True) + "\n")
    return 0


def _cmd_check(args) -> int:
    p = _load_problem(args)
    rep = compatibility_report(p, grid_n=args.grid_n)
    doc = {"overall": rep.overall, "entries": rep.as_list()}
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def _cmd_diffuse(args) -> int:
    if args.config:
        base = Path(args.config).parent
        doc = json.loads(Path(args.config).read_text())
    else:
        base, doc = None, {}
    for key, attr in (("alpha", "alpha"), ("beta_target", "beta"), ("grid_n", "grid_n"), ("out", "out")):
        v = getattr(args, attr)
        if v is not None:
            doc[key] = v
    cfg = ScenarioConfig.from_json(doc)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CompatibilityWarning)
        code = run_scenario(cfg, base, config=_quad_config(args))
    for w in caught:
        if issubclass(w.category, CompatibilityWarning):
            print(f"warning: {w.message}", file=sys.stderr)
    return code


def _cmd_selftest(args) -> int:
    from .acceptance import run_all

    results = run_all(log=print)
    return 0 if all(r.passed for r in results) else 1


class _Usage(Exception):
    pass


_COMMANDS = {
    "ml": _cmd_ml,
    "frac": _cmd_frac,
    "solve": _cmd_solve,
    "check": _cmd_check,
    "diffuse": _cmd_diffuse,
    "selftest": _cmd_selftest,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; exit status 0 on success, 1 on numeric failure, 2 on usage error."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        return _COMMANDS[args.command](args)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except FracRegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        # malformed input files or arguments
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
