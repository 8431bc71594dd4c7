import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracreg.errors import NonNormalError, SingularityError
from fracreg.fraccli import build_neumann_laplacian
from fracreg.opalgebra import (
    MatrixOperator,
    default_t_grid,
    eig_oracle,
    interp_norm,
    resolve,
    sectoriality_scan,
)


def random_op(seed, n=6):
    rng = np.random.default_rng(seed)
    return MatrixOperator(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


def test_operator_validation():
    with pytest.raises(ValueError):
        MatrixOperator(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        MatrixOperator(np.eye(2), phi=4.0)
    with pytest.raises(ValueError):
        MatrixOperator(np.eye(2), lambda0=-1)
    assert MatrixOperator.scalar(2.0).dim == 1


def test_resolve_examples():
    b = np.array([1.0, -2.0, 3.0])
    assert np.allclose(resolve(MatrixOperator(np.zeros((3, 3))), 2.0, b), b / 2)
    A = MatrixOperator(np.diag([-1.0, -3.0]))
    assert np.allclose(resolve(A, 1.0, [1.0, 1.0]), [1 / 2, 1 / 4])


def test_resolve_residual():
    A = random_op(3)
    b = np.arange(6.0)
    x = resolve(A, 0.5 + 2j, b)
    assert np.allclose((0.5 + 2j) * x - A.entries @ x, b, atol=1e-12)


def test_resolve_in_spectrum():
    with pytest.raises(SingularityError):
        resolve(MatrixOperator(np.diag([1.0, 2.0])), 2.0, [1.0, 1.0])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
def test_resolvent_identity(seed, lam, mu):
    A = random_op(seed, 4)
    b = np.ones(4)
    try:
        lhs = resolve(A, lam, b) - resolve(A, mu, b)
        rhs = (mu - lam) * resolve(A, lam, resolve(A, mu, b))
    except SingularityError:
        return
    scale = max(1.0, np.max(np.abs(lhs)), np.max(np.abs(rhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * scale


def test_scan_minus_identity():
    A = MatrixOperator(-np.eye(3), phi=0.9 * math.pi)
    rep = sectoriality_scan(A, 0.9 * math.pi, 0.1, np.logspace(-3, 3, 25))
    ray0 = [v for ang, v in rep.rays if ang == 0.0][0]
    assert ray0 < 1.0
    assert rep.admissible[(0.9 * math.pi, 0.1)]


def test_scan_zero_operator():
    rep = sectoriality_scan(MatrixOperator(np.zeros((2, 2))), 0.8 * math.pi, 0.05, np.logspace(-2, 2, 9))
    assert all(abs(v - 1.0) < 1e-12 for _, v in rep.rays)


def test_scan_rotated_laplacian():
    phi = 0.4
    A = build_neumann_laplacian(16, rotation_phi=phi)
    mags = np.logspace(-2, 4, 31)
    ok = sectoriality_scan(A, math.pi - phi - 0.05, 0.05, mags)
    bad = sectoriality_scan(A, math.pi - phi + 0.3, 0.05, mags)
    assert ok.admissible[(math.pi - phi - 0.05, 0.05)]
    assert not bad.admissible[(math.pi - phi + 0.3, 0.05)]


def test_scan_rejects_bad_angles():
    with pytest.raises(ValueError):
        sectoriality_scan(MatrixOperator(np.eye(2)), 0.5, 0.6, [1.0])


def test_interp_norm_eigenvector():
    A = MatrixOperator(np.diag([-1.0, -4.0]))
    v, targ, _ = interp_norm(A, 0.5, np.array([1.0, 0.0]), np.logspace(-3, 3, 601), full_output=True)
    assert v == pytest.approx(1.0)
    # profile t^0.5 / (t + 1) peaks at t = 1 with value 0.5
    _, _, prof = interp_norm(A, 0.5, np.array([1.0, 0.0]), np.array([1.0]), full_output=True)
    assert prof[0] == pytest.approx(0.5)


def test_interp_norm_decaying_tail():
    A = MatrixOperator(np.diag([-1.0, -2.0, -5.0]))
    x = np.array([1.0, -1.0, 0.5])
    ts = np.logspace(1, 6, 30)
    _, _, prof = interp_norm(A, 0.4, x, ts, full_output=True)
    M = 1.0
    Ax = np.max(np.abs(A.apply(x)))
    assert np.all(prof <= M * ts ** (0.4 - 1) * Ax * (1 + 1e-12))
    assert prof[-1] < prof[0]


def test_interp_norm_monotone_in_theta():
    A = build_neumann_laplacian(32)
    x = np.abs(np.linspace(0, 1, 32) - 0.5) ** 0.4
    ts = default_t_grid(A)
    vals = [interp_norm(A, th, x, ts) for th in (0.2, 0.4, 0.6, 0.8)]
    for t1, t2, v1, v2 in zip((0.2, 0.4, 0.6), (0.4, 0.6, 0.8), vals, vals[1:]):
        assert v1 <= v2 * max(1.0, ts[-1]) ** (t2 - t1)


def test_interp_norm_cusp_growth():
    def norm_for(gamma, n, theta=0.5):
        A = build_neumann_laplacian(n)
        return interp_norm(A, theta, np.abs(np.linspace(0, 1, n) - 0.5) ** gamma)

    rough = [norm_for(0.3, n) for n in (32, 64, 128)]
    smooth = [norm_for(1.6, n) for n in (32, 64, 128)]
    assert rough[-1] / rough[0] >= 2.0
    assert smooth[-1] / smooth[0] < 1.5


def test_eig_oracle_diagonal():
    vals, V = eig_oracle(MatrixOperator(np.diag([3.0, -1.0, 2.0])))
    assert sorted(vals.real) == pytest.approx([-1.0, 2.0, 3.0])


def test_eig_oracle_neumann():
    A = build_neumann_laplacian(8)
    vals, V = eig_oracle(A)
    k = int(np.argmin(np.abs(vals)))
    assert abs(vals[k]) < 1e-10
    assert np.allclose(V[:, k] / V[0, k], 1.0)
    recon = V @ np.diag(vals) @ (V.conj().T * A.weights)
    assert np.linalg.norm(recon - A.entries) <= 1e-10 * np.linalg.norm(A.entries)


def test_eig_oracle_unitary_case():
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    lam = rng.normal(size=5) + 1j * rng.normal(size=5)
    A = MatrixOperator(q @ np.diag(lam) @ q.conj().T)
    vals, V = eig_oracle(A)
    assert np.linalg.norm(V @ np.diag(vals) @ V.conj().T - A.entries) <= 1e-10


def test_eig_oracle_rejects_nonnormal():
    with pytest.raises(NonNormalError):
        eig_oracle(MatrixOperator(np.array([[0.0, 1.0], [0.0, 0.0]])))


def test_json_roundtrip(tmp_path):
    A = build_neumann_laplacian(8, rotation_phi=0.3)
    A.to_json(tmp_path / "a.json")
    B = MatrixOperator.from_json(tmp_path / "a.json")
    assert np.array_equal(A.entries, B.entries)
    assert B.phi == A.phi and B.lambda0 == A.lambda0
    assert np.array_equal(A.weights, B.weights)


def test_csv_loader(tmp_path):
    (tmp_path / "a.csv").write_text("1,2j\n-2j,3\n")
    A = MatrixOperator.from_csv(tmp_path / "a.csv")
    assert A.entries[0, 1] == 2j and A.entries[1, 1] == 3
