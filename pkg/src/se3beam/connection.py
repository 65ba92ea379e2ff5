"""Levi-Civita connection of a left-invariant metric on SE(3), at algebra level.

For left-invariant vector fields the connection reduces to a bilinear map
on se(3); with it, the geodesic equation of the kinetic-energy metric can be
compared term by term with the free rigid-body Euler-Poincare equation.
"""

from __future__ import annotations

import numpy as np

from . import liegroup as lg
from .errors import SingularMetric

# smallest admissible eigenvalue relative to the largest
SPD_RTOL = 1.0e-12


class Metric6:
    """Symmetric positive-definite 6x6 operator on angular-first twists.

    Used both for inertia (twist -> momentum) and for Hooke stiffness
    (strain -> stress). The inverse is factored once at construction.
    """

    def __init__(self, matrix, sym_tol: float = 1.0e-12):
        M = np.array(matrix, dtype=float)
        if M.shape == (6,):
            M = np.diag(M)
        if M.shape != (6, 6):
            raise SingularMetric(f"metric must be 6x6 or a 6-vector diagonal, got {M.shape}")
        if not np.all(np.isfinite(M)):
            raise SingularMetric("metric has non-finite entries")
        scale = max(np.abs(M).max(), np.finfo(float).tiny)
        if np.abs(M - M.T).max() > sym_tol * scale:
            raise SingularMetric("metric is not symmetric")
        M = 0.5 * (M + M.T)
        eig = np.linalg.eigvalsh(M)
        if eig[0] <= SPD_RTOL * eig[-1]:
            raise SingularMetric(f"metric is not positive definite (eigenvalues {eig[0]:.3g}..{eig[-1]:.3g})")
        self.matrix = M
        self.inv = np.linalg.inv(M)
        self.inv = 0.5 * (self.inv + self.inv.T)
        self.eigenvalues = eig

    def __repr__(self):
        if np.count_nonzero(self.matrix - np.diag(np.diag(self.matrix))) == 0:
            return f"Metric6(diag={np.diag(self.matrix).tolist()})"
        return f"Metric6({self.matrix.tolist()})"

    def __call__(self, xi) -> np.ndarray:
        return np.asarray(xi, float) @ self.matrix.T

    apply = __call__

    def solve(self, mu) -> np.ndarray:
        return np.asarray(mu, float) @ self.inv.T

    def norm2(self, xi) -> np.ndarray:
        """Quadratic form ``xi^T M xi``."""
        return lg.pairing(self(xi), xi)


def as_metric(J) -> Metric6:
    return J if isinstance(J, Metric6) else Metric6(J)


def koszul(xi, eta, J) -> np.ndarray:
    """Algebra-level Levi-Civita map ``nabla(xi, eta)`` for the metric ``J``.

    Closed form of the Koszul formula for left-invariant fields::

        nabla(xi, eta) = ad(xi, eta)/2 - J^-1 (ad*(xi, J eta) + ad*(eta, J xi))/2
    """
    J = as_metric(J)
    sym = lg.ad_star(xi, J(eta)) + lg.ad_star(eta, J(xi))
    return 0.5 * lg.ad(xi, eta) - 0.5 * J.solve(sym)


def geodesic_residual(chi, chi_dot, J) -> np.ndarray:
    """Covariant acceleration ``chi_dot + nabla(chi, chi)``; zero on geodesics."""
    return np.asarray(chi_dot, float) + koszul(chi, chi, J)
