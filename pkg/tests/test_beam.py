import numpy as np
import pytest

from se3beam import beam as bm
from se3beam import liegroup as lg
from se3beam import rigidbody as rb
from se3beam.beam import _closed_fields
from se3beam.errors import CflViolated, GridTooCoarse
from se3beam.integrators import lie_rk4_step

from conftest import random_poses

STEEL = dict(radius=0.05, E=2e11, rho=7800.0)


def params(n_s=65, bc="free-free", **kw):
    J, C = bm.circular_section(**STEEL)
    return bm.BeamParams(1.0, n_s, J, C, bc=bc, **kw)


def random_state(p, rng, scale=0.1):
    eps = p.eps0 + scale * rng.standard_normal((p.n_s, 6))
    chi = scale * rng.standard_normal((p.n_s, 6))
    return bm.BeamState(eps, chi, bm.poses_from_strain(eps, p.ds, random_poses(rng, 1)[0]))


# ---------------------------------------------------------------- parameters


def test_params_validation():
    with pytest.raises(GridTooCoarse):
        params(n_s=2)
    with pytest.raises(ValueError):
        params(bc="hinged-free")
    with pytest.raises(ValueError):
        bm.BeamParams(-1.0, 10, np.eye(6), np.eye(6))
    p = params(bc="clamped-clamped")
    assert p.ends == ("clamped", "clamped")
    assert p.eps0.shape == (65, 6) and not p.eps0.flags.writeable
    assert p.ds == pytest.approx(1 / 64)


def test_circular_section_layout():
    J, C = bm.circular_section(**STEEL, nu=0.3)
    A = np.pi * 0.05**2
    I = np.pi * 0.05**4 / 4
    G = 2e11 / 2.6
    k = 6 * 1.3 / (7 + 6 * 0.3)
    assert np.allclose(np.diag(J.matrix), 7800 * np.array([2 * I, I, I, A, A, A]))
    assert np.allclose(np.diag(C.matrix), [G * 2 * I, 2e11 * I, 2e11 * I, 2e11 * A, k * G * A, k * G * A])


def test_c_max_is_bar_speed():
    # the axial wave is the fastest for a steel rod: sqrt(E / rho)
    assert params().c_max == pytest.approx(np.sqrt(2e11 / 7800), rel=1e-12)


# ---------------------------------------------------------------- kinematics


def test_straight_reference_strain():
    n, ds = 11, 0.1
    H = lg.Pose(np.broadcast_to(np.eye(3), (n, 3, 3)), np.outer(np.arange(n) * ds, [1.0, 0, 0]))
    eps = bm.strain_from_poses(H, ds)
    assert np.allclose(eps, [0, 0, 0, 1, 0, 0], atol=1e-14)


def test_one_parameter_subgroup_strain_is_exact(rng):
    xi = rng.standard_normal(6)
    ds = 0.05
    H = lg.exp(np.broadcast_to(xi, (21, 6)), np.arange(21) * ds)
    for centered in (False, True):
        assert np.abs(bm.strain_from_poses(H, ds, centered) - xi).max() < 1e-12


def test_strain_from_poses_convergence():
    # H(s) = exp(s a) exp(sin(s) b) has strain Ad(exp(-sin s b), a) + cos(s) b
    a = np.array([0.3, -0.2, 0.5, 1.0, 0.1, 0.0])
    b = np.array([0.0, 0.4, 0.0, 0.0, 0.0, 0.2])

    def errs(n):
        s = np.linspace(0, 1, n)
        ds = s[1]
        B = lg.exp(np.outer(np.sin(s), b))
        H = lg.compose(lg.exp(np.outer(s, a)), B)
        exact = lg.Ad(lg.inverse(B), np.broadcast_to(a, (n, 6))) + np.outer(np.cos(s), b)
        fwd = np.abs(bm.strain_from_poses(H, ds)[:-1] - exact[:-1]).max()
        cen = np.abs(bm.strain_from_poses(H, ds, centered=True)[1:-1] - exact[1:-1]).max()
        return fwd, cen

    (f1, c1), (f2, c2) = errs(41), errs(81)
    assert 1.8 < f1 / f2 < 2.2
    assert 3.6 < c1 / c2 < 4.4


def test_poses_from_strain_roundtrip(rng):
    p = params(33)
    eps = p.eps0 + 0.2 * np.sin(np.outer(p.s, np.arange(1, 7)))
    H = bm.poses_from_strain(eps, p.ds)
    mid = 0.5 * (eps[1:] + eps[:-1])
    assert np.abs(bm.strain_from_poses(H, p.ds)[:-1] - mid).max() < 1e-12


# ---------------------------------------------------------------- right-hand side


def test_rest_state_is_equilibrium():
    for bc in ("free-free", "clamped-free", "clamped-clamped"):
        p = params(bc=bc)
        deps, dchi = bm.beam_rhs(bm.rest_state(p), p)
        assert np.array_equal(deps, np.zeros_like(deps))
        assert np.array_equal(dchi, np.zeros_like(dchi))


def test_rigid_translation_is_a_solution(rng):
    p = params()
    chi = np.zeros((p.n_s, 6))
    chi[:, 3:] = rng.standard_normal(3)
    st = bm.BeamState(p.eps0.copy(), chi, bm.rest_state(p).H)
    deps, dchi = bm.beam_rhs(st, p)
    assert np.abs(deps).max() == 0.0
    assert np.abs(dchi).max() < 1e-14


def test_rhs_matches_linear_timoshenko_oracle():
    # small bending/shear wave toward E2; scalar Timoshenko equations written out by hand
    p = params(65)
    J, C = np.diag(p.J.matrix), np.diag(p.C.matrix)
    s, ds = p.s, p.ds
    a = 1e-6
    kappa3 = a * np.sin(3 * np.pi * s)
    gamma2 = a * 1e-3 * np.cos(2 * np.pi * s)
    omega3 = a * 10 * np.cos(3 * np.pi * s)
    v2 = a * 100 * np.sin(2 * np.pi * s)
    eps = p.eps0.copy()
    eps[:, 2] += kappa3
    eps[:, 4] += gamma2
    chi = np.zeros((p.n_s, 6))
    chi[:, 2] = omega3
    chi[:, 4] = v2
    deps, dchi = bm.beam_rhs(bm.BeamState(eps, chi, bm.rest_state(p).H), p)

    # stay two nodes away from the ends, where the free-end closure acts
    def D(f):
        return (f[3:-1] - f[1:-3]) / (2 * ds)

    i = slice(2, -2)
    oracle = {
        "omega3_t": (C[2] * D(kappa3) + C[4] * gamma2[i]) / J[2],
        "v2_t": C[4] * D(gamma2) / J[4],
        "kappa3_t": D(omega3),
        "gamma2_t": D(v2) - omega3[i],
    }
    got = {"omega3_t": dchi[i, 2], "v2_t": dchi[i, 4], "kappa3_t": deps[i, 2], "gamma2_t": deps[i, 4]}
    for key in oracle:
        err = np.abs(got[key] - oracle[key]).max() / np.abs(oracle[key]).max()
        assert err < 1e-2, (key, err)


def test_clamped_and_free_end_closure(rng):
    p = params(17, bc="clamped-free")
    st = random_state(p, rng)
    deps, dchi = bm.beam_rhs(st, p)
    assert np.array_equal(dchi[0], np.zeros(6))
    assert np.array_equal(deps[-1], np.zeros(6))
    st = bm.tip_load_pluck(p, 1e-3)
    assert np.array_equal(st.chi[0], np.zeros(6))
    assert np.array_equal(st.eps[-1], p.eps0[-1])


def test_objectivity(rng):
    p = params(65)
    st = random_state(p, rng)
    G = random_poses(rng, 1)[0]
    moved = bm.BeamState(st.eps, st.chi, lg.compose(G, st.H))
    for a, b in zip(bm.beam_rhs(st, p), bm.beam_rhs(moved, p)):
        assert np.array_equal(a, b)
    assert np.abs(np.subtract(bm.energies(st, p), bm.energies(moved, p))).max() == 0.0
    e1 = bm.strain_from_poses(st.H, p.ds)
    e2 = bm.strain_from_poses(moved.H, p.ds)
    assert np.abs(e1 - e2).max() < 1e-12
    dt = 0.2 * p.max_dt()
    a, b = bm.step(st, p, dt), bm.step(moved, p, dt)
    assert np.abs(a.eps - b.eps).max() == 0.0 and np.abs(a.chi - b.chi).max() == 0.0
    assert np.abs(lg.compose(G, a.H).matrix() - b.H.matrix()).max() < 1e-12


# ---------------------------------------------------------------- time stepping


def _numpy_step(st, p, dt):
    y = np.stack([st.eps, st.chi])

    def f(y):
        return np.stack(bm.beam_rhs(bm.BeamState(y[0], y[1], st.H), p))

    def vel(y):
        return _closed_fields(y[0], y[1], p)[0]

    H, y, _ = lie_rk4_step(st.H, y, f, vel, dt)
    return bm.BeamState(y[0], y[1], H, st.t + dt)


@pytest.mark.parametrize("bc", ["free-free", "clamped-free", "clamped-clamped"])
def test_compiled_step_matches_reference(bc, rng):
    p = params(33, bc=bc)
    st = bm.state_from_fields(p, p.eps0 + 0.05 * rng.standard_normal((33, 6)), 0.05 * rng.standard_normal((33, 6)))
    dt = 0.5 * p.max_dt()
    a, b = bm.step(st, p, dt), _numpy_step(st, p, dt)
    for x, y in ((a.eps, b.eps), (a.chi, b.chi)):
        assert np.abs(x - y).max() <= 1e-13 * np.abs(y).max()
    assert np.abs(a.H.matrix() - b.H.matrix()).max() < 1e-13
    assert a.t == b.t


def test_rest_stays_at_rest():
    p = params(33, bc="clamped-free")
    traj = bm.simulate(bm.rest_state(p), p, p.max_dt(), 10_000, stride=10_000)
    assert np.abs(traj[-1].chi).max() < 1e-14
    assert np.array_equal(traj[-1].eps, p.eps0)


def test_cfl_violation():
    p = params(33)
    with pytest.raises(CflViolated):
        bm.step(bm.rest_state(p), p, 1.01 * p.max_dt(0.5))
    with pytest.raises(CflViolated):
        bm.simulate(bm.rest_state(p), p, 0.0, 10)


def test_simulate_sampling():
    p = params(17)
    dt = p.max_dt(0.25)
    traj = bm.simulate(bm.bump_pluck(p, 0.01), p, dt, 25, stride=10)
    assert [round(s.t / dt) for s in traj] == [0, 10, 20, 25]


@pytest.mark.parametrize("bc", ["free-free", "clamped-free", "clamped-clamped"])
def test_energy_nearly_conserved(bc):
    p = params(65, bc=bc)
    st = bm.bump_pluck(p, 0.05) if bc == "free-free" else bm.strike_state(p, 0.1)
    E0 = sum(bm.energies(st, p))
    traj = bm.simulate(st, p, p.max_dt(0.25), 400, stride=100)
    drift = max(abs(sum(bm.energies(s, p)) / E0 - 1) for s in traj)
    assert drift < 1e-6


def test_free_free_total_momentum_constant():
    # SBP differencing with trapezoidal weights telescopes the stress flux; only time-stepping error remains
    p = params(33)
    traj = bm.simulate(bm.strike_state(p, 0.1), p, p.max_dt(0.25), 400, stride=100)
    w = bm.trapezoid_weights(p.n_s, p.ds)
    P = np.array([w @ bm.spatial_momenta(s, p)[0] for s in traj])
    scale = np.abs(w @ np.abs(bm.spatial_momenta(traj[0], p)[0])).max()
    assert np.abs(P - P[0]).max() < 1e-10 * scale


def test_compatibility_defect_converges():
    # strain rebuilt from the evolved poses vs the evolved strain
    out = []
    for n in (33, 65, 129):
        p = params(n)
        st = bm.strike_state(p, 0.1)
        n_steps = int(np.ceil(2e-4 / p.max_dt(0.25)))
        last = bm.simulate(st, p, 2e-4 / n_steps, n_steps, stride=n_steps)[-1]
        out.append(np.abs(bm.strain_from_poses(last.H, p.ds, centered=True)[1:-1] - last.eps[1:-1]).max())
    assert out[0] / out[1] > 3 and out[1] / out[2] > 3, out


# ---------------------------------------------------------------- diagnostics


def test_energy_examples(rng):
    p = params(17)
    st = bm.rest_state(p)
    assert bm.energies(st, p) == (0.0, 0.0)
    chi = rng.standard_normal(6)
    moving = bm.BeamState(st.eps, np.broadcast_to(chi, (17, 6)), st.H)
    Ec, Ep = bm.energies(moving, p)
    assert Ec == pytest.approx(0.5 * p.L * chi @ p.J.matrix @ chi, rel=1e-13)
    assert Ep == 0.0
    assert np.array_equal(bm.stress(st, p).sigma, np.zeros((17, 6)))


def test_to_spatial(rng):
    p = params(17)
    st = random_state(p, rng)
    ident = bm.BeamState(st.eps, st.chi, lg.Pose.identity(17))
    e, c = bm.to_spatial(ident)
    assert np.array_equal(e, st.eps) and np.array_equal(c, st.chi)
    e, c = bm.to_spatial(st)
    inv = lg.inverse(st.H)
    assert np.abs(lg.Ad(inv, e) - st.eps).max() < 1e-12
    assert np.abs(lg.Ad(inv, c) - st.chi).max() < 1e-12


def test_spatial_compatibility_converges():
    # d_s chi_s - d_t eps_s - ad(eps_s, chi_s) along stored trajectories
    out = []
    for n in (33, 65):
        p = params(n)
        st = bm.strike_state(p, 0.1)
        n_steps = 2 * int(np.ceil(1e-4 / p.max_dt(0.25)))
        dt = 2e-4 / n_steps
        traj = bm.simulate(st, p, dt, n_steps, stride=1)
        sp = [bm.to_spatial(s) for s in traj]
        es = np.stack([x[0] for x in sp])
        cs = np.stack([x[1] for x in sp])
        res = bm.diff_s(cs[1:-1], p.ds) - (es[2:] - es[:-2]) / (2 * dt) - lg.ad(es[1:-1], cs[1:-1])
        mat = bm.material_residuals(np.stack([s.eps for s in traj]), np.stack([s.chi for s in traj]), p, dt)[1]
        out.append((np.abs(res[:, 1:-1]).max(), np.abs(mat[:, 1:-1]).max()))
    (s1, m1), (s2, m2) = out
    assert s1 / s2 > 3 and m1 / m2 > 3, out


def test_conservation_residual_rest():
    p = params(33)
    traj = bm.simulate(bm.rest_state(p), p, p.max_dt(), 10, stride=5)
    assert bm.conservation_residual(traj, p) < 1e-14


def test_conservation_residual_rigid_screw():
    # straight beam screwing along its own axis: every stress vanishes, pi_s is the rigid one
    p = params(17)
    chi = np.zeros((17, 6))
    chi[:, 0], chi[:, 3] = 3.0, 0.5
    st = bm.BeamState(p.eps0.copy(), chi, bm.rest_state(p).H)
    dt = p.max_dt()
    traj = bm.simulate(st, p, dt, 300, stride=100)
    res = bm.conservation_residual(traj, p)
    rig = rb.simulate(rb.RigidState(lg.Pose.identity(), chi[0]), p.J, dt, 300, stride=100)
    drift = np.abs(np.diff([rb.spatial_momentum(s, p.J) for s in rig], axis=0)).max()
    assert res < 1e-8
    assert res <= drift / (100 * dt) + 1e-12


def test_material_and_spatial_residuals_agree_in_the_limit():
    # the transported material motion residual and the spatial conservation-law residual
    # differ only by truncation error
    gaps = []
    for n in (65, 129):
        p = params(n)
        n_steps = int(np.ceil(2e-4 / p.max_dt(0.25)))
        dt = 2e-4 / n_steps
        traj = bm.simulate(bm.strike_state(p, 0.1), p, dt, n_steps)
        mot, _ = bm.material_residuals(np.stack([s.eps for s in traj]), np.stack([s.chi for s in traj]), p, dt)
        moved = np.stack([lg.coadjoint_transport(s.H, m) for s, m in zip(traj[1:-1], mot)])
        pis, sigs = zip(*(bm.spatial_momenta(s, p) for s in traj))
        pis, sigs = np.stack(pis), np.stack(sigs)
        spatial = (pis[2:] - pis[:-2]) / (2 * dt) - bm.diff_s(sigs[1:-1], p.ds)
        gaps.append(np.abs(moved[:, 1:-1] - spatial[:, 1:-1]).max())
    assert gaps[0] / gaps[1] > 3, gaps


def test_insufficient_history():
    from se3beam.errors import InsufficientHistory

    p = params(17)
    with pytest.raises(InsufficientHistory):
        bm.conservation_residual([bm.rest_state(p)] * 2, p)
