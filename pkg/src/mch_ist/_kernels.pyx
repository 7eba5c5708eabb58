# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 sweep for the Jost system; the z loop runs in parallel."""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()


cdef inline void _rhs(double complex iz, double complex ik4, double m, double p1, double p2, double q,
                      double complex a, double complex b, double complex c, double complex d,
                      double complex* out) noexcept nogil:
    # mu' = q * ( -(ik/4)[s3, mu] + P mu ),
    # P = [[-i m p2/z, i p1 + p2/z], [i p1 - p2/z, i m p2/z]]
    cdef double complex pz = p2 * iz
    cdef double complex imp = 1j * m * pz
    cdef double complex ip1 = 1j * p1
    cdef double complex P12 = ip1 + pz
    cdef double complex P21 = ip1 - pz
    out[0] = q * (P12 * c - imp * a)
    out[1] = q * (P12 * d - (2.0 * ik4 + imp) * b)
    out[2] = q * (P21 * a + (2.0 * ik4 + imp) * c)
    out[3] = q * (P21 * b + imp * d)


cdef void _sweep(double complex zz, const double[:] m, const double[:] p1, const double[:] p2,
                 const double[:] q, double step, Py_ssize_t nsteps, Py_ssize_t record_every,
                 double complex[:, :] o, double complex[:, :, :] tr) noexcept nogil:
    cdef double complex k1[4]
    cdef double complex k2[4]
    cdef double complex k3[4]
    cdef double complex k4[4]
    cdef double complex y[4]
    cdef double complex t[4]
    cdef double complex iz = 1.0 / zz
    cdef double complex ik4 = 0.25j * (zz - iz)
    cdef double h2 = 0.5 * step, h6 = step / 6.0
    cdef Py_ssize_t s, j, e, r = 0
    y[0] = 1.0
    y[1] = 0.0
    y[2] = 0.0
    y[3] = 1.0
    if record_every > 0:
        for e in range(4):
            tr[0, e // 2, e % 2] = y[e]
        r = 1
    for s in range(nsteps):
        j = 2 * s
        _rhs(iz, ik4, m[j], p1[j], p2[j], q[j], y[0], y[1], y[2], y[3], k1)
        for e in range(4):
            t[e] = y[e] + h2 * k1[e]
        _rhs(iz, ik4, m[j + 1], p1[j + 1], p2[j + 1], q[j + 1], t[0], t[1], t[2], t[3], k2)
        for e in range(4):
            t[e] = y[e] + h2 * k2[e]
        _rhs(iz, ik4, m[j + 1], p1[j + 1], p2[j + 1], q[j + 1], t[0], t[1], t[2], t[3], k3)
        for e in range(4):
            t[e] = y[e] + step * k3[e]
        _rhs(iz, ik4, m[j + 2], p1[j + 2], p2[j + 2], q[j + 2], t[0], t[1], t[2], t[3], k4)
        for e in range(4):
            y[e] = y[e] + h6 * (k1[e] + 2.0 * (k2[e] + k3[e]) + k4[e])
        if record_every > 0 and (s + 1) % record_every == 0:
            for e in range(4):
                tr[r, e // 2, e % 2] = y[e]
            r = r + 1
    for e in range(4):
        o[e // 2, e % 2] = y[e]


def jost_rk4(const double complex[:] z, const double[:] m, const double[:] mx,
             const double[:] q, double step, Py_ssize_t record_every=0, int num_threads=0):
    """March mu from I across the fine grid (nodes 0, 2, 4, ...; odd nodes are midpoints).

    Returns the final matrices (nz, 2, 2) and, if record_every > 0, the
    trajectory sampled every `record_every` steps (nz, nrec, 2, 2).
    """
    cdef Py_ssize_t nz = z.shape[0]
    cdef Py_ssize_t nf = m.shape[0]
    cdef Py_ssize_t nsteps = (nf - 1) // 2
    cdef Py_ssize_t nrec = nsteps // record_every + 1 if record_every > 0 else 0
    q_arr = np.asarray(q)
    p1_arr = np.asarray(mx) / (2.0 * q_arr ** 3)
    p2_arr = np.asarray(m) / (2.0 * q_arr ** 2)
    cdef const double[:] p1 = p1_arr
    cdef const double[:] p2 = p2_arr
    out = np.zeros((nz, 2, 2), dtype=np.complex128)
    traj = np.zeros((nz, max(nrec, 1), 2, 2), dtype=np.complex128)
    cdef double complex[:, :, :] o = out
    cdef double complex[:, :, :, :] tr = traj
    cdef Py_ssize_t iz
    cdef int nt = num_threads if num_threads > 0 else 1
    for iz in prange(nz, nogil=True, schedule="static", num_threads=nt):
        _sweep(z[iz], m, p1, p2, q, step, nsteps, record_every, o[iz], tr[iz])
    return out, traj[:, :nrec]
