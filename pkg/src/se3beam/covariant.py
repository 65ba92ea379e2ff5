"""Field-theoretic (covariant) form of the beam equations on X = [0, L] x R.

The reduced section is the se(3)-valued 1-form ``eps ds + chi dt``. Its
curvature, the divergence form of the equation of motion and the Noether
flux balance are evaluated here through the 4x4 matrix realization of the
algebra (brackets are matrix commutators, coadjoint actions are transposes
of adjoint matrices), independently of the cross-product formulas used by
:mod:`se3beam.beam`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import liegroup as lg
from .beam import BeamParams, diff_s, spatial_momenta, trapezoid_weights
from .connection import as_metric
from .errors import InsufficientHistory

_BASIS_HAT = lg.hat(np.eye(6))


@dataclass(frozen=True)
class ReducedSection:
    """Components ``(eps, chi)`` of the reduced section on a space-time grid.

    Arrays have shape ``(n_t, n_s, 6)``: ``eps`` pairs with ``ds`` and
    ``chi`` with ``dt``.
    """

    eps: np.ndarray
    chi: np.ndarray
    ds: float
    dt: float

    def __post_init__(self):
        eps = np.asarray(self.eps, float)
        chi = np.asarray(self.chi, float)
        if eps.shape != chi.shape or eps.ndim != 3 or eps.shape[-1] != 6:
            raise ValueError(f"section components must share shape (n_t, n_s, 6), got {eps.shape}, {chi.shape}")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "chi", chi)

    @classmethod
    def from_trajectory(cls, trajectory, ds: float) -> "ReducedSection":
        t = np.array([st.t for st in trajectory])
        dt = float(np.mean(np.diff(t))) if len(t) > 1 else 1.0
        return cls(np.stack([st.eps for st in trajectory]), np.stack([st.chi for st in trajectory]), ds, dt)

    @property
    def n_t(self) -> int:
        return self.eps.shape[0]


def _bracket(xi, eta) -> np.ndarray:
    X = lg.hat(xi)
    Y = lg.hat(eta)
    return lg.vee(X @ Y - Y @ X)


def _ad_matrix(xi) -> np.ndarray:
    """6x6 matrix of ``eta -> [xi, eta]`` assembled column by column from commutators."""
    X = lg.hat(xi)[..., None, :, :]
    cols = lg.vee(X @ _BASIS_HAT - _BASIS_HAT @ X)
    return np.swapaxes(cols, -1, -2)


def _coad(xi, mu) -> np.ndarray:
    # transpose of the adjoint matrix, by definition of the dual action
    return (np.swapaxes(_ad_matrix(xi), -1, -2) @ np.asarray(mu, float)[..., None])[..., 0]


def curvature(section: ReducedSection) -> np.ndarray:
    """``(s, t)`` component of ``d s + [s, s]``: ``D_s chi - D_t eps - [chi, eps]``.

    Centered in time, so results cover slices ``1 .. n_t-2``. Vanishes
    exactly when the section comes from a pose field ``H(s, t)``.
    """
    if section.n_t < 3:
        raise InsufficientHistory(f"need at least 3 time slices, got {section.n_t}")
    eps, chi = section.eps, section.chi
    d_t_eps = (eps[2:] - eps[:-2]) / (2.0 * section.dt)
    c = chi[1:-1]
    return diff_s(c, section.ds) - d_t_eps - _bracket(c, eps[1:-1])


def covariant_motion_residual(section: ReducedSection, J, C, eps0) -> np.ndarray:
    """Divergence form of the equation of motion.

    With ``dl/dchi = J chi`` and ``dl/deps = -C (eps - eps0)`` this is
    ``D_t(J chi) - D_s(C(eps - eps0)) - ad*(chi, J chi) + ad*(eps, C(eps - eps0))``
    on slices ``1 .. n_t-2``.
    """
    if section.n_t < 3:
        raise InsufficientHistory(f"need at least 3 time slices, got {section.n_t}")
    J = as_metric(J)
    C = as_metric(C)
    eps, chi = section.eps, section.chi
    p_t = chi @ J.matrix.T
    p_s = -((eps - np.asarray(eps0, float)) @ C.matrix.T)
    div = (p_t[2:] - p_t[:-2]) / (2.0 * section.dt) + diff_s(p_s[1:-1], section.ds)
    return div - _coad(chi[1:-1], p_t[1:-1]) - _coad(eps[1:-1], p_s[1:-1])


def momentum_flux(trajectory, p: BeamParams):
    """Total spatial momentum ``int pi_s ds`` and boundary flux ``[sigma_s]_0^L`` per slice."""
    w = trapezoid_weights(p.n_s, p.ds)
    total = []
    flux = []
    for st in trajectory:
        pi_s, sig_s = spatial_momenta(st, p)
        total.append(w @ pi_s)
        flux.append(sig_s[-1] - sig_s[0])
    return np.array(total), np.array(flux)


def noether_flux_balance(trajectory, p: BeamParams, relative: bool = False) -> float:
    """Max defect of ``d/dt int pi_s ds - [sigma_s]_0^L`` over the trajectory.

    The time derivative is centered. With ``relative=True`` the defect is
    divided by the largest local momentum rate ``int |d_t pi_s| ds`` seen
    along the trajectory, i.e. by the size of the terms that must cancel.
    """
    if len(trajectory) < 3:
        raise InsufficientHistory(f"need at least 3 time slices, got {len(trajectory)}")
    t = np.array([st.t for st in trajectory])
    dt = float(np.mean(np.diff(t)))
    total, flux = momentum_flux(trajectory, p)
    defect = (total[2:] - total[:-2]) / (2.0 * dt) - flux[1:-1]
    worst = float(np.abs(defect).max())
    if not relative:
        return worst
    pi_s = np.stack([spatial_momenta(st, p)[0] for st in trajectory])
    w = trapezoid_weights(p.n_s, p.ds)
    rate = np.abs(pi_s[2:] - pi_s[:-2]) / (2.0 * dt)
    scale = float((np.einsum("i,tik->tk", w, rate)).max())
    return worst / scale if scale > 0 else worst
