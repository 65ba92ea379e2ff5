"""Free rigid body (underwater-vehicle model) on SE(3).

This is the beam model with every s-derivative removed: the body velocity
obeys ``J chi_dot = ad*(chi, J chi)``, i.e. ``m_dot = m x w + n x v`` and
``n_dot = n x w`` with ``(m, n) = J chi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import liegroup as lg
from .connection import Metric6, as_metric
from .integrators import lie_rk4_step


@dataclass(frozen=True)
class RigidState:
    H: lg.Pose
    chi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "chi", np.asarray(self.chi, dtype=float))


def euler_poincare_rhs(chi, J) -> np.ndarray:
    """Body acceleration ``J^-1 ad*(chi, J chi)``."""
    J = as_metric(J)
    return J.solve(lg.ad_star(chi, J(chi)))


def step_rk4(state: RigidState, J, dt: float) -> RigidState:
    """One RK4 step of the velocity with a fourth-order group update of ``H``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    J = as_metric(J)
    H, chi, _ = lie_rk4_step(state.H, state.chi, lambda c: euler_poincare_rhs(c, J), lambda c: c, dt)
    return RigidState(H, chi, state.t + dt)


def energy(chi, J) -> np.ndarray:
    return 0.5 * as_metric(J).norm2(chi)


def casimirs(pi):
    """The two se(3)* Casimirs ``(n.n, m.n)`` of a momentum ``(m, n)``."""
    pi = np.asarray(pi, float)
    m, n = pi[..., lg.ANG], pi[..., lg.LIN]
    return np.sum(n * n, axis=-1), np.sum(m * n, axis=-1)


def spatial_momentum(state: RigidState, J) -> np.ndarray:
    """Space-frame momentum ``coadjoint_transport(H, J chi)``, constant in free motion."""
    return lg.coadjoint_transport(state.H, as_metric(J)(state.chi))


def simulate(state: RigidState, J, dt: float, n_steps: int, stride: int = 1) -> list[RigidState]:
    """Run ``n_steps`` steps and return every ``stride``-th state, the first included."""
    J = as_metric(J)
    out = [state]
    for k in range(1, n_steps + 1):
        state = step_rk4(state, J, dt)
        if k % stride == 0:
            out.append(state)
    return out


def default_inertia(I=(1.0, 2.0, 3.0), mass: float = 1.0) -> Metric6:
    """``diag(I1, I2, I3, m, m, m)``; distinct ``I`` exercise gyroscopic coupling."""
    return Metric6(np.concatenate([np.asarray(I, float), np.full(3, float(mass))]))
