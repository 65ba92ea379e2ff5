import numpy as np
import pytest

from se3beam import liegroup as lg
from se3beam.connection import Metric6, geodesic_residual, koszul
from se3beam.errors import SingularMetric
from se3beam.rigidbody import euler_poincare_rhs

from conftest import random_spd

E = np.eye(6)


def _koszul_bruteforce(xi, eta, J):
    """Solve <J nabla, e_k> = (<J[xi,eta], e_k> - <J[eta,e_k], xi> + <J[e_k,xi], eta>) / 2."""
    rhs = np.array(
        [
            0.5 * (J @ lg.ad(xi, eta) @ e - J @ lg.ad(eta, e) @ xi + J @ lg.ad(e, xi) @ eta)
            for e in E
        ]
    )
    return np.linalg.solve(J, rhs)


def test_metric_accepts_diagonal_and_full(rng):
    assert np.array_equal(Metric6(np.arange(1.0, 7.0)).matrix, np.diag(np.arange(1.0, 7.0)))
    A = random_spd(rng)
    M = Metric6(A)
    x = rng.standard_normal(6)
    assert np.allclose(M(x), A @ x)
    assert np.allclose(M.solve(A @ x), x)
    assert np.isclose(M.norm2(x), x @ A @ x)


@pytest.mark.parametrize(
    "bad",
    [
        np.diag([1.0, 1, 1, 1, 1, 0]),
        np.diag([1.0, 1, 1, 1, 1, -1]),
        np.ones((5, 5)),
        np.triu(np.ones((6, 6))),
        np.full(6, np.nan),
    ],
)
def test_metric_rejects(bad):
    with pytest.raises(SingularMetric):
        Metric6(bad)


def test_koszul_matches_bruteforce(rng):
    for _ in range(50):
        J = random_spd(rng)
        xi, eta = rng.standard_normal((2, 6))
        assert np.abs(koszul(xi, eta, J) - _koszul_bruteforce(xi, eta, J)).max() < 1e-11


def test_koszul_diagonal_reduces_to_euler_poincare(rng):
    J = random_spd(rng)
    xi = rng.standard_normal((1000, 6))
    M = Metric6(J)
    ref = -M.solve(lg.ad_star(xi, M(xi)))
    assert np.abs(koszul(xi, xi, M) - ref).max() < 1e-12


def test_torsion_free(rng):
    J = Metric6(random_spd(rng))
    xi, eta = rng.standard_normal((2, 1000, 6))
    assert np.abs(koszul(xi, eta, J) - koszul(eta, xi, J) - lg.ad(xi, eta)).max() < 1e-12


def test_metric_compatible(rng):
    J = Metric6(random_spd(rng))
    chi, eta, zeta = rng.standard_normal((3, 1000, 6))
    lhs = lg.pairing(J(koszul(chi, eta, J)), zeta) + lg.pairing(J(eta), koszul(chi, zeta, J))
    assert np.abs(lhs).max() < 1e-12


def test_koszul_bilinear(rng):
    J = Metric6(random_spd(rng))
    x, y, z = rng.standard_normal((3, 100, 6))
    a, b = rng.standard_normal((2, 100, 1))
    assert np.abs(koszul(a * x + b * y, z, J) - a * koszul(x, z, J) - b * koszul(y, z, J)).max() < 1e-12
    assert np.abs(koszul(z, a * x + b * y, J) - a * koszul(z, x, J) - b * koszul(z, y, J)).max() < 1e-12
    sym = koszul(x, y, J) + koszul(y, x, J)
    assert np.abs(sym + J.solve(lg.ad_star(x, J(y)) + lg.ad_star(y, J(x)))).max() < 1e-12


def test_geodesic_examples():
    assert np.array_equal(geodesic_residual(np.zeros(6), np.zeros(6), np.eye(6)), np.zeros(6))
    res = geodesic_residual([0, 0, 1, 0, 0, 0], np.zeros(6), np.eye(6))
    assert np.abs(res).max() == 0.0


def test_geodesic_is_euler_poincare(rng):
    for _ in range(1000):
        J = Metric6(random_spd(rng))
        chi = rng.standard_normal(6)
        assert np.abs(geodesic_residual(chi, euler_poincare_rhs(chi, J), J)).max() < 1e-12
        chi_dot = rng.standard_normal(6)
        mismatch = chi_dot - euler_poincare_rhs(chi, J)
        assert np.abs(geodesic_residual(chi, chi_dot, J) - mismatch).max() < 1e-13
