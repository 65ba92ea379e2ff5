"""Explicit time stepping shared by the rigid-body and beam solvers.

Algebra-valued state (velocities, strains) is advanced with classical RK4.
Poses are advanced on the group with the matching Munthe-Kaas scheme: the
four RK stages produce an averaged twist ``chi_avg`` and the pose is updated
as ``H <- H exp(chi_avg dt)``, so it never leaves SE(3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import liegroup as lg
from .errors import NonFiniteState


@dataclass(frozen=True)
class StepControl:
    dt: float
    cfl_safety: float = 0.5
    max_steps: int = 10**8

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


def _check_finite(y):
    if not np.all(np.isfinite(y)):
        raise NonFiniteState("time step produced non-finite values")


def rk4_step(y, f, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of ``y' = f(y)``."""
    y = np.asarray(y, float)
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_finite(out)
    return out


def dexpinv(theta, xi) -> np.ndarray:
    """Rate ``theta'`` such that ``H exp(theta)`` has body velocity ``xi``.

    Series ``xi + ad(theta, xi)/2 + ad(theta, ad(theta, xi))/12`` truncated
    after the double bracket, enough for a fourth-order Munthe-Kaas step
    since ``theta = O(dt)``.
    """
    a1 = lg.ad(theta, xi)
    return xi + 0.5 * a1 + lg.ad(theta, a1) / 12.0


def reconstruct(H: lg.Pose, chi_avg, dt: float) -> lg.Pose:
    """Left update ``H exp(chi_avg dt)`` for a body-frame (material) velocity."""
    return lg.compose(H, lg.exp(chi_avg, dt))


def lie_rk4_step(H: lg.Pose, y, f, velocity, dt: float):
    """Advance ``y' = f(y)`` with RK4 and ``H' = H hat(velocity(y))`` with RKMK4.

    ``velocity`` maps the algebra state to the body twist that drives ``H``.
    Returns ``(H_new, y_new, chi_avg)`` where ``chi_avg`` is the averaged
    twist used for the pose update.
    """
    y = np.asarray(y, float)
    k1 = f(y)
    K1 = dt * velocity(y)
    y2 = y + 0.5 * dt * k1
    k2 = f(y2)
    K2 = dt * dexpinv(0.5 * K1, velocity(y2))
    y3 = y + 0.5 * dt * k2
    k3 = f(y3)
    K3 = dt * dexpinv(0.5 * K2, velocity(y3))
    y4 = y + dt * k3
    k4 = f(y4)
    K4 = dt * dexpinv(K3, velocity(y4))
    y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    chi_avg = (K1 + 2.0 * K2 + 2.0 * K3 + K4) / (6.0 * dt)
    _check_finite(y_new)
    _check_finite(chi_avg)
    return reconstruct(H, chi_avg, dt), y_new, chi_avg
