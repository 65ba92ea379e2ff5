"""Compiled inner loop of the beam integrator.

Mirrors ``beam.beam_rhs`` and ``integrators.lie_rk4_step`` point by point;
the test-suite checks both routes against each other.
"""

import numpy as np
from numba import njit

SMALL_ANGLE = 1.0e-6
SERIES_ANGLE = 1.0e-2


@njit(cache=True)
def _sbp_diff(f, ds, out):
    n = f.shape[0]
    for k in range(6):
        out[0, k] = (f[1, k] - f[0, k]) / ds
        out[n - 1, k] = (f[n - 1, k] - f[n - 2, k]) / ds
    for i in range(1, n - 1):
        for k in range(6):
            out[i, k] = (f[i + 1, k] - f[i - 1, k]) / (2.0 * ds)


@njit(cache=True)
def _cross_into(a0, a1, a2, b0, b1, b2, out, o):
    out[o] = a1 * b2 - a2 * b1
    out[o + 1] = a2 * b0 - a0 * b2
    out[o + 2] = a0 * b1 - a1 * b0


@njit(cache=True)
def _ad(x, y, out):
    # (w1 x w2, w1 x v2 - w2 x v1)
    _cross_into(x[0], x[1], x[2], y[0], y[1], y[2], out, 0)
    out[3] = x[1] * y[5] - x[2] * y[4] - (y[1] * x[5] - y[2] * x[4])
    out[4] = x[2] * y[3] - x[0] * y[5] - (y[2] * x[3] - y[0] * x[5])
    out[5] = x[0] * y[4] - x[1] * y[3] - (y[0] * x[4] - y[1] * x[3])


@njit(cache=True)
def _ad_star(x, mu, out):
    # (m x w + n x v, n x w)
    m0, m1, m2, n0, n1, n2 = mu[0], mu[1], mu[2], mu[3], mu[4], mu[5]
    w0, w1, w2, v0, v1, v2 = x[0], x[1], x[2], x[3], x[4], x[5]
    out[0] = m1 * w2 - m2 * w1 + n1 * v2 - n2 * v1
    out[1] = m2 * w0 - m0 * w2 + n2 * v0 - n0 * v2
    out[2] = m0 * w1 - m1 * w0 + n0 * v1 - n1 * v0
    out[3] = n1 * w2 - n2 * w1
    out[4] = n2 * w0 - n0 * w2
    out[5] = n0 * w1 - n1 * w0


@njit(cache=True)
def _matvec6(M, x, out):
    for a in range(6):
        acc = 0.0
        for b in range(6):
            acc += M[a, b] * x[b]
        out[a] = acc


@njit(cache=True)
def beam_rates(eps, chi, eps0, Jm, Jinv, Cm, ds, left_clamped, right_clamped, deps, dchi, work):
    """Material-form rates with boundary closure; ``work`` is (4, n, 6) scratch."""
    n = eps.shape[0]
    chib = work[0]
    sig = work[1]
    dsig = work[2]
    dchib = work[3]
    tmp = np.empty(6)
    pi = np.empty(6)
    a1 = np.empty(6)
    a2 = np.empty(6)
    for i in range(n):
        for k in range(6):
            chib[i, k] = chi[i, k]
            tmp[k] = eps[i, k] - eps0[i, k]
        _matvec6(Cm, tmp, a1)
        for k in range(6):
            sig[i, k] = a1[k]
    if left_clamped:
        chib[0, :] = 0.0
    else:
        sig[0, :] = 0.0
    if right_clamped:
        chib[n - 1, :] = 0.0
    else:
        sig[n - 1, :] = 0.0
    _sbp_diff(sig, ds, dsig)
    _sbp_diff(chib, ds, dchib)
    for i in range(n):
        _matvec6(Jm, chib[i], pi)
        _ad_star(chib[i], pi, a1)
        _ad_star(eps[i], sig[i], a2)
        for k in range(6):
            tmp[k] = a1[k] + dsig[i, k] - a2[k]
        _matvec6(Jinv, tmp, a1)
        _ad(chib[i], eps[i], a2)
        for k in range(6):
            dchi[i, k] = a1[k]
            deps[i, k] = dchib[i, k] - a2[k]
    if left_clamped:
        dchi[0, :] = 0.0
    else:
        deps[0, :] = 0.0
    if right_clamped:
        dchi[n - 1, :] = 0.0
    else:
        deps[n - 1, :] = 0.0


@njit(cache=True)
def _dexpinv_scaled(theta, xi, scale, out, t1, t2):
    # scale * (xi + ad(theta, xi)/2 + ad(theta, ad(theta, xi))/12)
    _ad(theta, xi, t1)
    _ad(theta, t1, t2)
    for k in range(6):
        out[k] = scale * (xi[k] + 0.5 * t1[k] + t2[k] / 12.0)


@njit(cache=True)
def _exp_compose(R, r, th, E, V, Rn):
    """In place ``(R, r) <- (R, r) exp(th)`` for one pose; ``E, V, Rn`` are 3x3 scratch."""
    w0, w1, w2 = th[0], th[1], th[2]
    t2 = w0 * w0 + w1 * w1 + w2 * w2
    t = np.sqrt(t2)
    if t < SMALL_ANGLE:
        a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0
        b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0
    else:
        a = np.sin(t) / t
        h = np.sin(0.5 * t) / t
        b = 2.0 * h * h
    if t < SERIES_ANGLE:
        c = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2 * t2 * t2 / 362880.0
    else:
        c = (t - np.sin(t)) / (t2 * t)
    # W^2 = w w^T - |w|^2 I
    w = (w0, w1, w2)
    W = ((0.0, -w2, w1), (w2, 0.0, -w0), (-w1, w0, 0.0))
    for p in range(3):
        for q in range(3):
            sq = w[p] * w[q]
            if p == q:
                sq -= t2
            d = 1.0 if p == q else 0.0
            E[p, q] = d + a * W[p][q] + b * sq
            V[p, q] = d + b * W[p][q] + c * sq
    for p in range(3):
        acc = r[p]
        for q in range(3):
            dr = V[q, 0] * th[3] + V[q, 1] * th[4] + V[q, 2] * th[5]
            acc += R[p, q] * dr
        Rn[p, 0] = R[p, 0] * E[0, 0] + R[p, 1] * E[1, 0] + R[p, 2] * E[2, 0]
        Rn[p, 1] = R[p, 0] * E[0, 1] + R[p, 1] * E[1, 1] + R[p, 2] * E[2, 1]
        Rn[p, 2] = R[p, 0] * E[0, 2] + R[p, 1] * E[1, 2] + R[p, 2] * E[2, 2]
        r[p] = acc
    drift = 0.0
    for p in range(3):
        row = 0.0
        for q in range(3):
            g = Rn[0, p] * Rn[0, q] + Rn[1, p] * Rn[1, q] + Rn[2, p] * Rn[2, q]
            if p == q:
                g -= 1.0
            row += abs(g)
            E[p, q] = g
        drift = max(drift, row)
    if drift > 1.0e-12:
        # one Newton step of the polar iteration: R (I - (R^T R - I) / 2)
        for p in range(3):
            for q in range(3):
                R[p, q] = Rn[p, q] - 0.5 * (Rn[p, 0] * E[0, q] + Rn[p, 1] * E[1, q] + Rn[p, 2] * E[2, q])
    else:
        for p in range(3):
            for q in range(3):
                R[p, q] = Rn[p, q]


@njit(cache=True)
def advance(eps, chi, R, r, eps0, Jm, Jinv, Cm, ds, dt, left_clamped, right_clamped, n_steps):
    """``n_steps`` RK4 / RKMK4 steps, updating all arrays in place.

    Returns False if a non-finite value appeared (arrays then hold the last
    finite state).
    """
    n = eps.shape[0]
    work = np.empty((4, n, 6))
    ke = np.empty((4, n, 6))
    kc = np.empty((4, n, 6))
    K = np.empty((4, n, 6))
    ye = np.empty((n, 6))
    yc = np.empty((n, 6))
    vel = np.empty(6)
    th = np.empty(6)
    t1 = np.empty(6)
    t2 = np.empty(6)
    dk = np.empty(6)
    E = np.empty((3, 3))
    V = np.empty((3, 3))
    Rn = np.empty((3, 3))
    for _ in range(n_steps):
        for stage in range(4):
            if stage == 0:
                for i in range(n):
                    for k in range(6):
                        ye[i, k] = eps[i, k]
                        yc[i, k] = chi[i, k]
            else:
                h = dt if stage == 3 else 0.5 * dt
                for i in range(n):
                    for k in range(6):
                        ye[i, k] = eps[i, k] + h * ke[stage - 1, i, k]
                        yc[i, k] = chi[i, k] + h * kc[stage - 1, i, k]
            beam_rates(ye, yc, eps0, Jm, Jinv, Cm, ds, left_clamped, right_clamped,
                       ke[stage], kc[stage], work)
            # work[0] now holds the boundary-closed stage velocity
            for i in range(n):
                for k in range(6):
                    vel[k] = work[0, i, k]
                if stage == 0:
                    for k in range(6):
                        K[0, i, k] = dt * vel[k]
                else:
                    f = 1.0 if stage == 3 else 0.5
                    for k in range(6):
                        th[k] = f * K[stage - 1, i, k]
                    _dexpinv_scaled(th, vel, dt, dk, t1, t2)
                    for k in range(6):
                        K[stage, i, k] = dk[k]
        ok = True
        for i in range(n):
            for k in range(6):
                de = (ke[0, i, k] + 2.0 * ke[1, i, k] + 2.0 * ke[2, i, k] + ke[3, i, k]) / 6.0
                dc = (kc[0, i, k] + 2.0 * kc[1, i, k] + 2.0 * kc[2, i, k] + kc[3, i, k]) / 6.0
                ye[i, k] = eps[i, k] + dt * de
                yc[i, k] = chi[i, k] + dt * dc
                th[k] = (K[0, i, k] + 2.0 * K[1, i, k] + 2.0 * K[2, i, k] + K[3, i, k]) / 6.0
                if not (np.isfinite(ye[i, k]) and np.isfinite(yc[i, k]) and np.isfinite(th[k])):
                    ok = False
            if ok:
                # stash the averaged twist in ke[0] until the state is accepted
                for k in range(6):
                    ke[0, i, k] = th[k]
        if not ok:
            return False
        for i in range(n):
            for k in range(6):
                eps[i, k] = ye[i, k]
                chi[i, k] = yc[i, k]
                th[k] = ke[0, i, k]
            _exp_compose(R[i], r[i], th, E, V, Rn)
    return True
