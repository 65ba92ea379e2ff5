"""Momentum balance of a free-free beam, in material, spatial and covariant form.

A beam floating in space is released from a smooth bending bump. No force
acts on its ends, so the total space-frame momentum int pi_s ds must stay
constant up to discretization error. The run also evaluates the local conservation law, the
curvature (integrability) of the reduced section, and the energy.

    python3 demos/free_free_momentum.py
"""

import numpy as np

from se3beam import beam as bm
from se3beam import covariant as cv

J, C = bm.circular_section(radius=0.05, E=2e11, rho=7800.0)

print(" n_s   energy drift   Noether (rel)   local law residual   curvature")
for n_s in (33, 65, 129):
    p = bm.BeamParams(1.0, n_s, J, C, bc="free-free")
    dt = p.max_dt(cfl=0.25)
    T = 4e-4
    n_steps = int(np.ceil(T / dt))
    traj = bm.simulate(bm.bump_pluck(p, curvature=0.02), p, T / n_steps, n_steps)

    E = np.array([sum(bm.energies(s, p)) for s in traj])
    noether = cv.noether_flux_balance(traj, p, relative=True)
    law = bm.conservation_residual(traj, p)
    sec = cv.ReducedSection.from_trajectory(traj, p.ds)
    curv = np.abs(cv.curvature(sec)[:, 1:-1]).max()
    print(f"{n_s:4d}   {np.abs(E / E[0] - 1).max():.2e}       {noether:.2e}        {law:.3e}          {curv:.2e}")

# both ends are free, so the boundary flux is zero and int pi_s ds should not move;
# what moves is discretization error, compared here with the local momentum density
total, flux = cv.momentum_flux(traj, p)
w = bm.trapezoid_weights(p.n_s, p.ds)
scale = max((w @ np.abs(bm.spatial_momenta(s, p)[0])).max() for s in traj)
print(f"boundary flux {np.abs(flux).max():.1e}, total momentum drift {np.abs(total - total[0]).max() / scale:.2e}")
