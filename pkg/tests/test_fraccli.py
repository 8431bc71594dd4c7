import json
import math
import warnings
from pathlib import Path

import numpy as np
import pytest

from fracreg.errors import CompatibilityWarning, SectorError
from fracreg.fraccli import (
    ScenarioConfig,
    build_neumann_laplacian,
    main,
    neumann_weights,
    profile,
    run_scenario,
    weighted_mean,
)
from fracreg.fracops import SampledPath
from fracreg.opalgebra import eig_oracle
from fracreg.specfun import mittag_leffler_array

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def quiet(*_):
    pass


# -- operator -------------------------------------------------------------------------


def test_rows_sum_to_zero():
    A = build_neumann_laplacian(10)
    assert np.allclose(A.entries.sum(axis=1), 0)
    assert np.allclose(A.apply(np.ones(10)), 0)


def test_unrotated_spectrum():
    n = 8
    A = build_neumann_laplacian(n)
    vals, _ = eig_oracle(A)
    assert np.all(np.abs(vals.imag) < 1e-10) and np.all(vals.real <= 1e-10)
    h = 1 / (n - 1)
    k = np.arange(n)
    expected = -(4 / h**2) * np.sin(k * np.pi / (2 * (n - 1))) ** 2
    assert np.allclose(np.sort(vals.real), np.sort(expected), atol=1e-9)


def test_cosines_are_eigenvectors():
    n = 16
    A = build_neumann_laplacian(n)
    s = np.linspace(0, 1, n)
    v = np.cos(3 * np.pi * s)
    Av = A.apply(v)
    lam = Av[0] / v[0]
    assert np.allclose(Av, lam * v)


def test_rotation_and_sector():
    A = build_neumann_laplacian(8, rotation_phi=0.5)
    B = build_neumann_laplacian(8)
    assert np.allclose(A.entries, np.exp(0.5j) * B.entries)
    assert A.phi == pytest.approx(math.pi - 0.5 - 0.01)
    assert A.lambda0 > 0
    with pytest.raises(ValueError):
        build_neumann_laplacian(2)


def test_weighted_mean_of_constant():
    w = neumann_weights(9)
    assert w.sum() == pytest.approx(1.0)
    assert weighted_mean(np.full((3, 9), 2.0), w) == pytest.approx([2.0, 2.0, 2.0])


def test_profiles(tmp_path):
    assert np.allclose(profile({"type": "constant", "value": 2}, 8), 2)
    assert np.allclose(profile({"type": "eigenmode", "k": 1}, 3), [1, 0, -1])
    cusp = profile({"type": "cusp", "gamma": 0.5, "s0": 0.0}, 5)
    assert np.allclose(cusp, np.sqrt(np.linspace(0, 1, 5)))
    flat = profile({"type": "flat_cusp", "gamma": 0.3}, 9)
    assert abs(flat[4]) < 1e-4 and flat[0] == 1
    (tmp_path / "p.txt").write_text("1\n2\n3\n")
    assert np.allclose(profile({"type": "csv", "path": "p.txt"}, 3, tmp_path), [1, 2, 3])
    with pytest.raises(ValueError):
        profile({"type": "csv", "path": "p.txt"}, 4, tmp_path)
    with pytest.raises(ValueError):
        profile({"type": "spline"}, 4)


def test_config_validation():
    with pytest.raises(SectorError):
        ScenarioConfig(alpha=1.5, phi=0.9)
    with pytest.raises(ValueError):
        ScenarioConfig(spatial_n=4)
    with pytest.raises(ValueError):
        ScenarioConfig.from_json({"alpha": 0.5, "colour": "red"})


# -- scenario -------------------------------------------------------------------------


def test_eigenmode_trace(tmp_path):
    cfg = ScenarioConfig(alpha=0.6, spatial_n=16, grid_n=256, u0={"type": "eigenmode", "k": 1},
                         out=str(tmp_path / "o"))
    assert run_scenario(cfg, log=quiet) == 0
    rows = np.loadtxt(tmp_path / "o" / "plot.csv", delimiter=",", skiprows=1)
    t, sup = rows[:, 0], rows[:, 1]
    lam = build_neumann_laplacian(16).apply(np.cos(np.pi * np.linspace(0, 1, 16)))[0].real
    ref = np.abs(mittag_leffler_array(0.6, 1.0, lam * t**0.6))
    assert np.max(np.abs(sup - ref)) <= 1e-8


def test_mass_conservation(tmp_path):
    cfg = ScenarioConfig.from_json(json.loads((CONFIGS / "diffuse.json").read_text()))
    cfg.out = str(tmp_path / "o")
    assert run_scenario(cfg, log=quiet) == 0
    diag = json.loads((tmp_path / "o" / "diagnostics.json").read_text())
    assert diag["mass_drift"] <= 1e-8
    means = np.array(diag["mass_trace"])[:, 1]
    assert np.max(np.abs(means - means[0])) <= 1e-8
    for key in ("residual_sup", "holder_exponent_frac_deriv", "holder_exponent_Au", "compatibility", "mass_trace"):
        assert key in diag


def test_flat_cusp_threshold(tmp_path):
    # u1 must lie in the interpolation space of order 1 - (1 - beta)/alpha = 0.533,
    # i.e. roughly C^1.07 in space
    verdicts = {}
    for gamma in (0.3, 1.6):
        cfg = ScenarioConfig(alpha=1.5, beta_target=0.3, spatial_n=64, sweep_n=[16, 32, 64], grid_n=256,
                             u0={"type": "zero"}, u1={"type": "flat_cusp", "gamma": gamma},
                             out=str(tmp_path / f"g{gamma}"))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CompatibilityWarning)
            assert run_scenario(cfg, log=quiet) == 0
        diag = json.loads((tmp_path / f"g{gamma}" / "diagnostics.json").read_text())
        u1 = [e for e in diag["compatibility"] if e["id"] == "u1_interp"][0]
        verdicts[gamma] = (u1["verdict"], diag["regularity"]["passed"])
    assert verdicts[0.3] == (False, False)
    assert verdicts[1.6] == (True, True)


def test_compatibility_warning_is_not_fatal(tmp_path):
    cfg = ScenarioConfig(alpha=1.5, beta_target=0.3, spatial_n=64, sweep_n=[16, 32, 64], grid_n=128,
                         u0={"type": "zero"}, u1={"type": "cusp", "gamma": 0.2}, out=str(tmp_path / "o"))
    with pytest.warns(CompatibilityWarning):
        assert run_scenario(cfg, log=quiet) == 0


def test_determinism(tmp_path):
    outs = []
    for i in range(2):
        cfg = ScenarioConfig(alpha=0.7, spatial_n=12, grid_n=128, u0={"type": "cusp", "gamma": 0.7},
                             out=str(tmp_path / f"r{i}"))
        run_scenario(cfg, log=quiet)
        outs.append([(tmp_path / f"r{i}" / name).read_bytes() for name in ("frames.csv", "plot.csv")])
    assert outs[0] == outs[1]


def test_frames_layout(tmp_path):
    cfg = ScenarioConfig(alpha=0.7, spatial_n=8, grid_n=64, frames=5, out=str(tmp_path / "o"))
    run_scenario(cfg, log=quiet)
    lines = (tmp_path / "o" / "frames.csv").read_text().splitlines()
    assert lines[0].split(",")[:3] == ["t", "re_0", "im_0"]
    assert len(lines) == 6


# -- command line -----------------------------------------------------------------------


def test_cli_ml(capsys):
    assert main(["ml", "--alpha", "1", "--beta", "1", "--z", "1"]) == 0
    assert capsys.readouterr().out.startswith("2.718281828")
    assert main(["ml", "--alpha", "0.5", "--beta", "1", "--z=-1+2i", "--method", "contour"]) == 0


def test_cli_frac_integral(tmp_path, capsys):
    f = SampledPath(1.0, np.ones((65, 1)))
    f.to_csv(tmp_path / "one.csv")
    assert main(["frac", "--op", "integral", "--alpha", "0.5", str(tmp_path / "one.csv"),
                 "--out", str(tmp_path / "out.csv")]) == 0
    g = SampledPath.from_csv(tmp_path / "out.csv")
    assert np.allclose(g.values[:, 0].real, 2 * np.sqrt(g.times / np.pi), atol=1e-13)


def test_cli_solve_scalar(tmp_path, capsys):
    assert main(["solve", "--config", str(CONFIGS / "scalar.json"), "--grid-n", "2048",
                 "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert float(out.split()[1]) <= 1e-4
    assert (tmp_path / "o" / "solution.csv").exists()


def test_cli_check(capsys):
    assert main(["check", "--config", str(CONFIGS / "rl_boundary.json"), "--grid-n", "64"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert {e["id"] for e in doc["entries"]} >= {"f_holder", "g0_interp"}


def test_cli_diffuse(tmp_path):
    assert main(["diffuse", "--config", str(CONFIGS / "diffuse.json"), "--grid-n", "64",
                 "--out", str(tmp_path / "d")]) == 0
    assert (tmp_path / "d" / "diagnostics.json").exists()


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nosuch"],
        ["ml", "--alpha", "0.5", "--z", "1"],
        ["ml", "--alpha", "0.5", "--beta", "1", "--z", "oops"],
        ["solve"],
        ["frac", "--op", "integral", "/nonexistent.csv", "--alpha", "0.5"],
        ["solve", "--config", "/nonexistent.json"],
    ],
)
def test_cli_usage_errors(argv, capsys):
    assert main(argv) == 2


def test_cli_numeric_failures(tmp_path, capsys):
    # sector violation
    doc = json.loads((CONFIGS / "scalar.json").read_text())
    doc["operator"]["phi"] = 0.5
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    assert main(["solve", "--config", str(tmp_path / "bad.json")]) == 1
    # series that cannot converge within its term cap
    assert main(["ml", "--alpha", "0.05", "--beta", "1", "--z", "60", "--method", "series"]) == 1
    (tmp_path / "sector.json").write_text(json.dumps({"alpha": 1.5, "phi": 0.9}))
    assert main(["diffuse", "--config", str(tmp_path / "sector.json")]) == 1
