"""Reflectionless potentials: symmetric eigenvalue orbits and the finite residue system."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CollisionError, DomainError, SingularSystemError
from .reconstruct import PointField, assemble_field, field_from_M
from .rhp import Expansions, discrete_pole_table, discrete_poles
from .timeflow import NATIVE_KAPPA, KappaScaling, PhaseSpec

COLLISION_TOL = 1e-10
CONSTRAINT_TOL = 1e-10


def complete_symmetry(z0, c0):
    """Orbit of (z0, c0) under z -> -conj(z) and z -> 1/conj(z), with matching norming constants.

    c(-conj z0) = conj c0, c(-1/z0) = -c0/z0^2, c(1/conj z0) = -conj(c0)/conj(z0)^2.
    Points on the imaginary axis need real c0; points on the unit circle need c0 = i g z0, g real.
    """
    z0, c0 = complex(z0), complex(c0)
    if not z0.imag > 0:
        raise DomainError("eigenvalues lie in the open upper half plane")
    if abs(z0 - 1j) < COLLISION_TOL:
        raise DomainError("z = i is a singular point of the time flow")
    if c0 == 0:
        raise DomainError("norming constant must be nonzero")
    on_axis = abs(z0.real) < COLLISION_TOL
    on_circle = abs(abs(z0) - 1.0) < COLLISION_TOL
    if on_axis and abs(c0.imag) > CONSTRAINT_TOL * abs(c0):
        raise DomainError("an eigenvalue on the imaginary axis needs a real norming constant")
    if on_circle and abs((c0 / (1j * z0)).imag) > CONSTRAINT_TOL * abs(c0):
        raise DomainError("an eigenvalue on the unit circle needs c = i g z with g real")
    cand = [
        (z0, c0),
        (-z0.conjugate(), c0.conjugate()),
        (-1.0 / z0, -c0 / z0 ** 2),
        (1.0 / z0.conjugate(), -c0.conjugate() / z0.conjugate() ** 2),
    ]
    orbit = []
    for z, c in cand:
        if all(abs(z - w) > COLLISION_TOL for w, _ in orbit):
            orbit.append((z, c))
    return orbit


@dataclass(frozen=True)
class SolitonData:
    zeros: tuple
    norming: tuple

    def a(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for zj in self.zeros:
            out = out * (z - zj) / (z - np.conj(zj))
        return out

    def a_prime(self, n):
        zn = self.zeros[n]
        out = 1.0 / (zn - np.conj(zn))
        for j, zj in enumerate(self.zeros):
            if j != n:
                out *= (zn - zj) / (zn - np.conj(zj))
        return out

    @property
    def log_a_i(self):
        return complex(np.log(self.a(1j)))

    @property
    def right_norming(self):
        """ctilde_n = 1/(c_n a'(z_n)^2)."""
        return tuple(1.0 / (c * self.a_prime(n) ** 2) for n, c in enumerate(self.norming))

    @property
    def discrete(self):
        return list(zip(self.zeros, self.norming, self.right_norming))


def soliton_data(seeds) -> SolitonData:
    """Symmetric completion of seeds [(z0, c0), ...]; orbits must not meet."""
    pts = []
    for z0, c0 in seeds:
        orbit = complete_symmetry(z0, c0)
        for z, _ in orbit:
            if any(abs(z - w) < COLLISION_TOL for w, _ in pts):
                raise CollisionError(f"eigenvalue {z} appears in two orbits")
        pts.extend(orbit)
    return SolitonData(tuple(z for z, _ in pts), tuple(c for _, c in pts))


def rational_batch(points, cols, coefs, cond_max=1e13):
    """Expansion coefficients of M = I + sum_p coef_p v_p/(z - p) (column col_p) for a batch.

    points, cols: (P,); coefs: (B, P). v_p = M_other(p) solves a (2P x 2P) system
    per batch entry. Returns a list of Expansions.
    """
    points = np.asarray(points, dtype=complex)
    cols = np.asarray(cols, dtype=int)
    coefs = np.atleast_2d(np.asarray(coefs, dtype=complex))
    nb, P = coefs.shape
    if P == 0:
        I = np.eye(2, dtype=complex)
        Z = np.zeros((2, 2), dtype=complex)
        return [Expansions(I.copy(), I.copy(), Z.copy(), Z.copy(), 0j, 0j, I.copy(), Z.copy())
                for _ in range(nb)]
    other = 1 - cols
    couple = (cols[None, :] == other[:, None]).astype(float)  # [a, b]: pole b sits in column other_a
    diff = points[:, None] - points[None, :]
    np.fill_diagonal(diff, 1.0)
    K = couple[None] * coefs[:, None, :] / diff[None]  # (B, P, P)
    A = np.zeros((nb, P, 2, P, 2), dtype=complex)
    for r in range(2):
        A[:, :, r, :, r] = -K
    A = A.reshape(nb, 2 * P, 2 * P) + np.eye(2 * P)
    rhs = np.zeros((2 * P,))
    rhs[2 * np.arange(P) + other] = 1.0
    cond = np.linalg.cond(A)
    if not np.all(np.isfinite(cond)) or np.max(cond) > cond_max:
        raise SingularSystemError(f"residue system is singular (condition {np.max(cond):.3g})")
    v = np.linalg.solve(A, np.broadcast_to(rhs, (nb, 2 * P))[..., None])[..., 0].reshape(nb, P, 2)
    weighted = coefs[..., None] * v  # (B, P, 2)
    onehot = np.eye(2)[cols]  # (P, 2)

    def M_at(z):
        return np.eye(2) + np.einsum("bpr,pc->brc", weighted / (z - points)[None, :, None], onehot)

    def dM_at(z):
        return -np.einsum("bpr,pc->brc", weighted / ((z - points) ** 2)[None, :, None], onehot)

    M0, Mi, Mi1, Mmi, Mmi1 = M_at(0.0), M_at(1j), dM_at(1j), M_at(-1j), dM_at(-1j)
    Minf1 = np.einsum("bpr,pc->brc", weighted, onehot)
    return [Expansions(M0[b], Mi[b], Mi1[b], Minf1[b], eta=Minf1[b, 0, 1], zeta=-Minf1[b, 1, 1],
                       Mmi=Mmi[b], Mmi1=Mmi1[b]) for b in range(nb)]


def rational_expansions(poles, cond_max=1e13) -> Expansions:
    """M = I + sum_p coef_p v_p/(z - p) in column col_p, v_p = M_other(p), solved exactly."""
    return rational_batch([p.point for p in poles], [p.col for p in poles],
                          [[p.coef for p in poles]], cond_max)[0]


def _expansions_along(data: SolitonData, ys, t, side, time_sign):
    return rational_batch(*discrete_pole_table(data.discrete, ys, t, side, time_sign))


def soliton_points(data: SolitonData, ys, t=0.0, time_sign=1.0):
    """PointField at each y; y >= 0 uses the left problem, y < 0 the right one."""
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    out = [None] * len(ys)
    for side, mask in (("left", ys >= 0), ("right", ys < 0)):
        idx = np.flatnonzero(mask)
        if idx.size:
            for i, e in zip(idx, _expansions_along(data, ys[idx], t, side, time_sign)):
                out[i] = field_from_M(e, float(ys[i]), side, data.log_a_i)
    return out


def soliton_point(data: SolitonData, y, t=0.0, side=None, time_sign=1.0) -> PointField:
    side = side or ("left" if y >= 0 else "right")
    phase = PhaseSpec(float(y), float(t), time_sign)
    exp = rational_expansions(discrete_poles(data.discrete, phase, side))
    return field_from_M(exp, float(y), side, data.log_a_i)


def soliton_field(data: SolitonData, y_grid, t=0.0, time_sign=1.0):
    y_grid = np.asarray(y_grid, dtype=float)
    return assemble_field(soliton_points(data, y_grid, t, time_sign), t, y_grid)


def soliton_profile(data: SolitonData, x_grid, t=0.0, kappa=NATIVE_KAPPA, time_sign=1.0):
    """m(x) at physical time t on an arbitrary x grid, without interpolation.

    y(x) lies in [x - L, x] with L = -2 ln a(i); bisection there, then Newton
    with dx/dy = 1/q.
    """
    scaling = KappaScaling(kappa)
    tau = float(scaling.native_time(t))
    x_grid = np.asarray(x_grid, dtype=float)
    L = -2.0 * data.log_a_i.real if data.zeros else 0.0

    def at(ys):
        pts = soliton_points(data, ys, tau, time_sign)
        return np.array([p.x for p in pts]), np.array([p.q for p in pts]), np.array([p.m for p in pts])

    lo, hi = x_grid - L - 1e-9, x_grid + 1e-9
    for _ in range(12):
        mid = 0.5 * (lo + hi)
        xm = at(mid)[0]
        left = xm < x_grid
        lo, hi = np.where(left, mid, lo), np.where(left, hi, mid)
    y = 0.5 * (lo + hi)
    for _ in range(8):
        xs, q, _ = at(y)
        step = (xs - x_grid) * q
        y = np.clip(y - step, lo, hi)
        if np.max(np.abs(step)) < 1e-14:
            break
    return scaling.physical_field(at(y)[2])
