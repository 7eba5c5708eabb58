"""Pure numpy version of the Jost RK4 sweep, vectorized over z."""
import numpy as np


def _rhs(z, ik4, m, mx, q, y):
    a, b, c, d = y
    p1 = 1j * mx / (2.0 * q ** 3)
    p2 = m / (2.0 * q * q) / z
    P11 = -1j * m * p2
    P12 = p1 + p2
    P21 = p1 - p2
    P22 = 1j * m * p2
    return (
        q * (P11 * a + P12 * c),
        q * (-2.0 * ik4 * b + P11 * b + P12 * d),
        q * (2.0 * ik4 * c + P21 * a + P22 * c),
        q * (P21 * b + P22 * d),
    )


def jost_rk4(z, m, mx, q, step, record_every=0):
    z = np.asarray(z, dtype=complex)
    nz = z.shape[0]
    nsteps = (len(m) - 1) // 2
    nrec = nsteps // record_every + 1 if record_every > 0 else 0
    traj = np.zeros((nz, nrec, 2, 2), dtype=complex)
    ik4 = 0.25j * (z - 1.0 / z)
    one, zero = np.ones(nz, complex), np.zeros(nz, complex)
    y = (one, zero, zero.copy(), one.copy())
    if nrec:
        traj[:, 0] = np.eye(2)
    r = 1
    h2, h6 = 0.5 * step, step / 6.0
    for s in range(nsteps):
        j = 2 * s
        k1 = _rhs(z, ik4, m[j], mx[j], q[j], y)
        k2 = _rhs(z, ik4, m[j + 1], mx[j + 1], q[j + 1], [u + h2 * v for u, v in zip(y, k1)])
        k3 = _rhs(z, ik4, m[j + 1], mx[j + 1], q[j + 1], [u + h2 * v for u, v in zip(y, k2)])
        k4 = _rhs(z, ik4, m[j + 2], mx[j + 2], q[j + 2], [u + step * v for u, v in zip(y, k3)])
        y = tuple(u + h6 * (a + 2 * b + 2 * c + d) for u, a, b, c, d in zip(y, k1, k2, k3, k4))
        if nrec and (s + 1) % record_every == 0:
            traj[:, r] = np.stack(y, axis=-1).reshape(nz, 2, 2)
            r += 1
    out = np.stack(y, axis=-1).reshape(nz, 2, 2)
    return out, traj
