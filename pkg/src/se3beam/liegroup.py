"""SE(3), se(3) and se(3)* kernel.

Twists and co-twists are plain float arrays whose last axis has length 6,
laid out angular-first: ``xi = (omega, v)`` and ``mu = (m, n)``. Every
function broadcasts over leading axes, so a beam grid is just an
``(n_s, 6)`` array. Poses are stored as a rotation matrix and a
translation, optionally batched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NearSingular, NotInAlgebra

#: Layout of every 6-vector: angular part first, linear part second.
ANG = slice(0, 3)
LIN = slice(3, 6)

# below this rotation angle the exp/log coefficients use Taylor branches
SMALL_ANGLE = 1.0e-6
# log is refused within this distance of the pi branch cut
BRANCH_CUT_MARGIN = 1.0e-6
# rotations drifting further than this from SO(3) get re-projected
ORTHO_DRIFT = 1.0e-12
# below this angle the (t - sin t) / t^3 type coefficients switch to series
SERIES_ANGLE = 1.0e-2


def twist(ang, lin) -> np.ndarray:
    """Stack angular and linear 3-vectors into an angular-first 6-vector."""
    ang, lin = np.broadcast_arrays(np.asarray(ang, float), np.asarray(lin, float))
    return np.concatenate([ang, lin], axis=-1)


cotwist = twist


def pairing(mu, xi) -> np.ndarray:
    """Duality pairing <(m, n), (omega, v)> = m.omega + n.v."""
    return np.sum(np.asarray(mu) * np.asarray(xi), axis=-1)


_C1 = np.array([1, 2, 0])
_C2 = np.array([2, 0, 1])


def cross(a, b) -> np.ndarray:
    # np.cross carries a lot of per-call overhead for tiny arrays
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.ndim == 1 and b.ndim == 1:
        a0, a1, a2 = a.tolist()
        b0, b1, b2 = b.tolist()
        return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    return a[..., _C1] * b[..., _C2] - a[..., _C2] * b[..., _C1]


def skew(w) -> np.ndarray:
    """Matrix ``W`` with ``W @ u == cross(w, u)``."""
    w = np.asarray(w, float)
    W = np.zeros(w.shape[:-1] + (3, 3))
    W[..., 0, 1] = -w[..., 2]
    W[..., 0, 2] = w[..., 1]
    W[..., 1, 0] = w[..., 2]
    W[..., 1, 2] = -w[..., 0]
    W[..., 2, 0] = -w[..., 1]
    W[..., 2, 1] = w[..., 0]
    return W


def hat(xi) -> np.ndarray:
    """4x4 matrix ``[[skew(omega), v], [0, 0]]`` of a twist."""
    xi = np.asarray(xi, float)
    M = np.zeros(xi.shape[:-1] + (4, 4))
    M[..., :3, :3] = skew(xi[..., ANG])
    M[..., :3, 3] = xi[..., LIN]
    return M


def vee(M, tol: float = 1.0e-9) -> np.ndarray:
    """Inverse of :func:`hat`.

    Raises
    ------
    NotInAlgebra
        If the rotation block is not skew-symmetric or the last row is not
        zero, within ``tol``.
    """
    M = np.asarray(M, float)
    if M.shape[-2:] != (4, 4):
        raise NotInAlgebra(f"expected (..., 4, 4) matrix, got shape {M.shape}")
    W = M[..., :3, :3]
    if np.any(np.abs(W + np.swapaxes(W, -1, -2)) > tol):
        raise NotInAlgebra("rotation block is not skew-symmetric")
    if np.any(np.abs(M[..., 3, :]) > tol):
        raise NotInAlgebra("last row of an se(3) matrix must vanish")
    omega = 0.5 * np.stack(
        [W[..., 2, 1] - W[..., 1, 2], W[..., 0, 2] - W[..., 2, 0], W[..., 1, 0] - W[..., 0, 1]],
        axis=-1,
    )
    return np.concatenate([omega, M[..., :3, 3]], axis=-1)


def orthonormalize(R) -> np.ndarray:
    """Closest rotation matrix (polar factor) of each ``R``."""
    U, _, Vt = np.linalg.svd(np.asarray(R, float))
    Q = U @ Vt
    # guard against reflections produced by badly corrupted input
    flip = np.linalg.det(Q) < 0
    if np.any(flip):
        U = U.copy()
        U[flip, :, -1] *= -1
        Q = U @ Vt
    return Q


def _ortho_drift(R) -> np.ndarray:
    E = np.swapaxes(R, -1, -2) @ R - np.eye(3)
    return np.abs(E).sum(axis=-1).max(axis=-1)


def _maybe_orthonormalize(R: np.ndarray) -> np.ndarray:
    bad = _ortho_drift(R) > ORTHO_DRIFT
    if not np.any(bad):
        return R
    if R.ndim == 2:
        return orthonormalize(R)
    R = R.copy()
    R[bad] = orthonormalize(R[bad])
    return R


@dataclass(frozen=True)
class Pose:
    """Element of SE(3) as ``(R, r)``; ``R`` may carry leading batch axes.

    Acting on a point ``w`` gives ``R @ w + r``, matching the homogeneous
    matrix ``[[R, r], [0, 1]]``.
    """

    R: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        r = np.asarray(self.r, dtype=float)
        if R.shape[-2:] != (3, 3) or r.shape[-1:] != (3,) or R.shape[:-2] != r.shape[:-1]:
            raise ValueError(f"inconsistent pose shapes R{R.shape}, r{r.shape}")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "r", r)

    @classmethod
    def identity(cls, shape=()) -> "Pose":
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        return cls(np.broadcast_to(np.eye(3), shape + (3, 3)).copy(), np.zeros(shape + (3,)))

    @classmethod
    def from_matrix(cls, M) -> "Pose":
        M = np.asarray(M, float)
        return cls(M[..., :3, :3], M[..., :3, 3])

    @property
    def shape(self) -> tuple:
        return self.r.shape[:-1]

    def __len__(self) -> int:
        return self.shape[0]

    def __getitem__(self, idx) -> "Pose":
        return Pose(self.R[idx], self.r[idx])

    def matrix(self) -> np.ndarray:
        M = np.zeros(self.shape + (4, 4))
        M[..., :3, :3] = self.R
        M[..., :3, 3] = self.r
        M[..., 3, 3] = 1.0
        return M

    def inverse(self) -> "Pose":
        return inverse(self)

    def __matmul__(self, other: "Pose") -> "Pose":
        return compose(self, other)

    def act(self, w) -> np.ndarray:
        return act(self, w)

    def is_valid(self, tol: float = 1.0e-10) -> bool:
        return bool(
            np.all(_ortho_drift(self.R) <= tol)
            and np.all(np.abs(np.linalg.det(self.R) - 1.0) <= tol)
            and np.all(np.isfinite(self.r))
        )


def compose(A: Pose, B: Pose) -> Pose:
    """Group product ``A B``; the rotation is re-projected onto SO(3) if it drifted."""
    R = A.R @ B.R
    r = (A.R @ B.r[..., None])[..., 0] + A.r
    return Pose(_maybe_orthonormalize(R), r)


def inverse(A: Pose) -> Pose:
    Rt = np.swapaxes(A.R, -1, -2)
    return Pose(Rt, -(Rt @ A.r[..., None])[..., 0])


def act(A: Pose, w) -> np.ndarray:
    """Image ``R w + r`` of a material point ``w``."""
    w = np.asarray(w, float)
    return (A.R @ w[..., None])[..., 0] + A.r


def _exp_coefficients(theta):
    """sin(t)/t, (1-cos t)/t^2, (t - sin t)/t^3 without cancellation near 0."""
    theta = np.asarray(theta, float)
    small = theta < SMALL_ANGLE
    t = np.where(small, 1.0, theta)
    t2 = theta * theta
    a = np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(t) / t)
    h = np.sin(0.5 * t) / t
    b = np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0, 2.0 * h * h)
    series = theta < SERIES_ANGLE
    ts = np.where(series, 1.0, theta)
    c = np.where(
        series,
        1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2 * t2 * t2 / 362880.0,
        (ts - np.sin(ts)) / (ts * ts * ts),
    )
    return a, b, c


def exp(xi, dt=1.0) -> Pose:
    """Group exponential of ``dt * xi`` (closed-form Rodrigues formula).

    The translation is ``V v`` with ``V = I + b W + c W^2``, which makes
    ``exp(xi, s)`` the one-parameter subgroup generated by ``xi``.
    """
    xi = np.asarray(xi, float) * np.asarray(dt, float)[..., None]
    w = xi[..., ANG]
    v = xi[..., LIN]
    theta = np.linalg.norm(w, axis=-1)
    a, b, c = _exp_coefficients(theta)
    W = skew(w)
    W2 = W @ W
    I = np.eye(3)
    R = I + a[..., None, None] * W + b[..., None, None] * W2
    V = I + b[..., None, None] * W + c[..., None, None] * W2
    return Pose(R, (V @ v[..., None])[..., 0])


def log(H: Pose) -> np.ndarray:
    """Twist ``xi`` with ``exp(xi, 1) == H``.

    Raises
    ------
    NearSingular
        If any rotation angle is within 1e-6 of pi, where the axis sign is
        ambiguous.
    """
    R = H.R
    s_axis = 0.5 * np.stack(
        [R[..., 2, 1] - R[..., 1, 2], R[..., 0, 2] - R[..., 2, 0], R[..., 1, 0] - R[..., 0, 1]],
        axis=-1,
    )
    s = np.linalg.norm(s_axis, axis=-1)
    c = 0.5 * (np.trace(R, axis1=-2, axis2=-1) - 1.0)
    theta = np.arctan2(s, c)
    if np.any(theta >= np.pi - BRANCH_CUT_MARGIN):
        raise NearSingular(f"rotation angle {np.max(theta):.12g} too close to pi")
    small = theta < SMALL_ANGLE
    ts = np.where(small, 1.0, theta)
    t2 = theta * theta
    # theta / sin(theta)
    k = np.where(small, 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0, ts / np.where(small, 1.0, s))
    w = k[..., None] * s_axis
    a, b, _ = _exp_coefficients(theta)
    # V^{-1} = I - W/2 + d W^2 with d = (1 - a / (2 b)) / theta^2
    series = theta < SERIES_ANGLE
    tl = np.where(series, 1.0, theta)
    d = np.where(
        series,
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0 + t2 * t2 * t2 / 1209600.0,
        (1.0 - a / (2.0 * b)) / (tl * tl),
    )
    W = skew(w)
    Vinv = np.eye(3) - 0.5 * W + d[..., None, None] * (W @ W)
    return np.concatenate([w, (Vinv @ H.r[..., None])[..., 0]], axis=-1)


def ad(xi, eta) -> np.ndarray:
    """Lie bracket ``(w1 x w2, w1 x v2 - w2 x v1)``."""
    xi = np.asarray(xi, float)
    eta = np.asarray(eta, float)
    w1, v1 = xi[..., ANG], xi[..., LIN]
    w2, v2 = eta[..., ANG], eta[..., LIN]
    return np.concatenate([cross(w1, w2), cross(w1, v2) - cross(w2, v1)], axis=-1)


def ad_star(xi, mu) -> np.ndarray:
    """Coadjoint action ``(m x w + n x v, n x w)`` of a twist on a co-twist.

    Dual to :func:`ad`: ``pairing(ad_star(xi, mu), eta) == pairing(mu, ad(xi, eta))``.
    """
    xi = np.asarray(xi, float)
    mu = np.asarray(mu, float)
    w, v = xi[..., ANG], xi[..., LIN]
    m, n = mu[..., ANG], mu[..., LIN]
    return np.concatenate([cross(m, w) + cross(n, v), cross(n, w)], axis=-1)


def Ad(H: Pose, xi) -> np.ndarray:
    """Adjoint action ``vee(H hat(xi) H^-1)`` in closed form."""
    xi = np.asarray(xi, float)
    Rw = (H.R @ xi[..., ANG, None])[..., 0]
    Rv = (H.R @ xi[..., LIN, None])[..., 0]
    return np.concatenate([Rw, Rv + cross(H.r, Rw)], axis=-1)


def coadjoint_transport(H: Pose, mu) -> np.ndarray:
    """Material to spatial co-twist, ``(R m + r x R n, R n)``."""
    mu = np.asarray(mu, float)
    Rm = (H.R @ mu[..., ANG, None])[..., 0]
    Rn = (H.R @ mu[..., LIN, None])[..., 0]
    return np.concatenate([Rm + cross(H.r, Rn), Rn], axis=-1)
