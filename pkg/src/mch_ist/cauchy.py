"""Cauchy integral and boundary projections on the real spectral line.

Fast path: the discrete-time Hilbert transformer on the uniform k grid
(taps 2/(pi n) at odd lags, frequency response exactly -i sign(omega)),
applied as a zero-padded linear convolution so nothing wraps around.

Functions on the real z line are handled through the exact split

    C f(z) = C^k[H0](k(z)) + C^k[H1](k(z)) / z,
    H0 = sum over branches of f z^2/(1+z^2),  H1 = sum of f z/(1+z^2),

which follows from ds = z^2/(1+z^2) dk and 1/(s-z) = (1 + 1/(sz))/(k(s)-k(z)).

Slow path (oracle): a dense principal-value matrix on the same nodes built
by singularity subtraction with 1/(1+(k-k_i)^2) and trapezoid sums.
"""
from __future__ import annotations

import numpy as np
from scipy import fft as sfft
from scipy.integrate import quad

from .errors import DomainError
from .grids import SpectralGrid, k_of_z


def hilbert_taps(n):
    """Taps h[l] for lags l = -(n-1)..(n-1): 2/(pi l) for odd l, else 0."""
    lag = np.arange(-(n - 1), n)
    taps = np.zeros(2 * n - 1)
    odd = lag % 2 == 1
    taps[odd] = 2.0 / (np.pi * lag[odd])
    return taps


def _i1(k, A):
    """integral_A^inf ds / (s (k - s))."""
    u = k / A
    small = np.abs(u) < 1e-3
    us = np.where(small, 0.0, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = np.log1p(-us) / np.where(small, 1.0, k)
    ser = -(1 + u / 2 + u * u / 3 + u ** 3 / 4) / A
    return np.where(small, ser, big)


def _i2(k, A):
    """integral_A^inf ds / (s^2 (k - s))."""
    u = k / A
    small = np.abs(u) < 1e-2
    us = np.where(small, 0.5, u)
    big = (1.0 / us + np.log1p(-us) / (us * us)) / (A * A)
    ser = -(1 / 2 + u / 3 + u ** 2 / 4 + u ** 3 / 5 + u ** 4 / 6 + u ** 5 / 7 + u ** 6 / 8) / (A * A)
    return np.where(small, ser, big)


def _tail_fit(s, f):
    """c1, c2 with f ~ c1/s + c2/s^2 through the two outermost samples."""
    s1, s2 = s
    f1, f2 = f
    det = 1.0 / (s1 * s2 * s2) - 1.0 / (s2 * s1 * s1)
    c1 = (f1 / (s2 * s2) - f2 / (s1 * s1)) / det
    c2 = (f2 / s1 - f1 / s2) / det
    return c1, c2


class CauchyContext:
    """Cached transforms for one spectral grid."""

    def __init__(self, grid: SpectralGrid):
        self.grid = grid
        n = grid.n
        self.n = n
        self.nfft = sfft.next_fast_len(3 * n - 2)
        self._taps_hat = sfft.fft(hilbert_taps(n), self.nfft)
        zb = grid.z_nodes
        self.w0 = zb * zb / (1.0 + zb * zb)  # (2, n)
        self.w1 = zb / (1.0 + zb * zb)
        self._dense = None
        self._pv = None

    # -- k line -------------------------------------------------------
    def hilbert(self, f):
        """(1/pi) PV integral f(s)/(k - s) ds on the grid, along the last axis."""
        f = np.asarray(f)
        fh = sfft.fft(f, self.nfft, axis=-1)
        full = sfft.ifft(fh * self._taps_hat, axis=-1)
        out = full[..., self.n - 1: 2 * self.n - 1]
        return out.real if np.isrealobj(f) else out

    def _tail_hilbert(self, f):
        """Analytic contribution of c1/s + c2/s^2 tails beyond the grid to hilbert()."""
        k = self.grid.k_nodes
        K, d, n = self.grid.k_max, self.grid.dk, self.n
        idx = np.arange(n)
        c1, c2 = _tail_fit((k[-1], k[-2]), (f[..., -1], f[..., -2]))
        d1, d2 = _tail_fit((k[0], k[1]), (f[..., 0], f[..., 1]))
        c1, c2, d1, d2 = (np.asarray(c)[..., None] for c in (c1, c2, d1, d2))
        # two virtual nodes per side from the tail model keep every node at
        # least 2d away from where the closed-form tail starts
        out = 0.0
        for e in (1, 2):
            sr, sl = K + e * d, -K - e * d
            lag_r = idx - (n - 1 + e)
            lag_l = idx + e
            out = out + np.where(lag_r % 2 != 0, 2.0 / (np.pi * lag_r), 0.0) * (c1 / sr + c2 / sr ** 2)
            out = out + np.where(lag_l % 2 != 0, 2.0 / (np.pi * lag_l), 0.0) * (d1 / sl + d2 / sl ** 2)
        # odd-lag rule: node i sees cells of width 2d centred on nodes of the other parity
        A_r = np.where((n + 1 - idx) % 2 == 1, K + 3 * d, K + 2 * d)
        A_l = np.where((idx + 2) % 2 == 1, K + 3 * d, K + 2 * d)
        right = c1 * _i1(k, A_r) + c2 * _i2(k, A_r)
        left = d1 * _i1(-k, A_l) - d2 * _i2(-k, A_l)
        return out + (right + left) / np.pi

    def project(self, f, side, tail=False):
        h = self.hilbert(f)
        if tail:
            h = h + self._tail_hilbert(np.asarray(f, dtype=complex))
        sign = 1.0 if side in ("plus", +1) else -1.0
        return sign * 0.5 * np.asarray(f) + 0.5j * h

    def project_plus(self, f, tail=False):
        return self.project(f, "plus", tail)

    def project_minus(self, f, tail=False):
        return self.project(f, "minus", tail)

    @property
    def dense_kernel(self):
        """The Hilbert taps as an explicit antisymmetric Toeplitz matrix (zero diagonal)."""
        if self._dense is None:
            i = np.arange(self.n)
            lag = i[:, None] - i[None, :]
            D = np.zeros((self.n, self.n))
            odd = lag % 2 != 0
            D[odd] = 2.0 / (np.pi * lag[odd])
            self._dense = D
        return self._dense

    # -- z line via the k-line split ------------------------------------
    def split(self, fz):
        """(H0, H1) for samples fz of shape (..., 2, n)."""
        H0 = np.sum(fz * self.w0, axis=-2)
        H1 = np.sum(fz * self.w1, axis=-2)
        return H0, H1

    def project_z(self, fz, side):
        """Boundary values C_+ f or C_- f on both branches, shape (..., 2, n)."""
        H0, H1 = self.split(fz)
        c0 = self.project(H0, side)
        c1 = self.project(H1, side)
        zb = self.grid.z_nodes
        return c0[..., None, :] + c1[..., None, :] / zb

    def eval_k(self, H, kappa):
        """(1/2 pi i) sum H(s)/(s - kappa) dk, trapezoid; kappa off the real line."""
        k = self.grid.k_nodes
        kappa = np.asarray(kappa, dtype=complex)
        kern = 1.0 / (k - kappa[..., None])
        return np.tensordot(H, kern, axes=([-1], [-1])) * self.grid.dk / (2j * np.pi)

    def eval_z(self, fz, z):
        """C f(z) for z off the real line (z != 0)."""
        z = np.asarray(z, dtype=complex)
        H0, H1 = self.split(fz)
        kz = k_of_z(z)
        return self.eval_k(H0, kz) + self.eval_k(H1, kz) / z

    # -- dense oracle -------------------------------------------------
    @property
    def pv_matrix(self):
        """P with (P g)_i ~ PV integral over R of g(k)/(k - k_i) dk for decaying g.

        Singularity subtraction with psi_i(k) = 1/(1+(k-k_i)^2), whose PV
        integral against 1/(k-k_i) over R vanishes; the diagonal carries g'(k_i)
        (spectral derivative), and tails beyond +-K are closed with K g(+-K)/k.
        """
        if self._pv is not None:
            return self._pv
        k = self.grid.k_nodes
        d, K, n = self.grid.dk, self.grid.k_max, self.n
        w = np.full(n, d)
        w[0] = w[-1] = 0.5 * d
        diff = k[None, :] - k[:, None]  # k_j - k_i
        np.fill_diagonal(diff, 1.0)
        psi = 1.0 / (1.0 + diff ** 2)
        P = w[None, :] / diff
        np.fill_diagonal(P, 0.0)
        # - g_i sum_j w_j psi_ij/(k_j - k_i)
        P[np.diag_indices(n)] -= np.sum(P * psi, axis=1)
        # diagonal limit of (g - g_i psi)/(k - k_i) is g'(k_i)
        xi = 2 * np.pi * np.fft.fftfreq(n, d)
        Dm = np.fft.ifft(1j * xi[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0).real
        P += w[:, None] * Dm
        # psi tails outside [-K, K]: -(1/2)ln(1+1/U_R^2) + (1/2)ln(1+1/U_L^2)
        UR = K - k
        UL = K + k
        with np.errstate(divide="ignore"):
            out_r = 0.5 * np.log1p(1.0 / UR ** 2)
            out_l = 0.5 * np.log1p(1.0 / UL ** 2)
        diag_corr = -(out_r - out_l)
        # 1/k tails of the end samples, integral_K^inf K/(s (s - k_i)) ds = -K I1(k_i, K)
        tail_r = -K * _i1(k, K)
        tail_l = K * _i1(-k, K)
        # endpoint nodes: combine the divergent pieces into one finite integral
        J, _ = quad(lambda s: (K / s - 1.0 / (1.0 + (s - K) ** 2)) / (s - K), K, np.inf, limit=200)
        ends = [0, n - 1]
        diag_corr[ends] = 0.0
        tail_r[-1] = 0.0
        tail_l[0] = 0.0
        # node n-1: right pieces merge into J; left pieces are regular
        P[np.diag_indices(n)] += diag_corr
        P[:, -1] += tail_r
        P[:, 0] += tail_l
        P[-1, -1] += J + out_l[-1]
        P[0, 0] += -J - out_r[0]
        self._pv = P
        return P

    def project_pv_z(self, fz, side):
        """Dense-quadrature boundary values on both branches (independent of the fast path)."""
        H0, H1 = self.split(np.asarray(fz, dtype=complex))
        P = self.pv_matrix
        zb = self.grid.z_nodes
        pv = (H0 @ P.T)[..., None, :] + (H1 @ P.T)[..., None, :] / zb
        sign = 1.0 if side in ("plus", +1) else -1.0
        return sign * 0.5 * fz + pv / (2j * np.pi)


def cauchy_eval(f, z, grid: SpectralGrid, tail=False):
    """(1/2 pi i) integral f(s)/(s - z) ds on the k grid for Im z != 0.

    Returns (value, tail_estimate). With tail=True the 1/s, 1/s^2 tails fitted
    to the end samples are integrated in closed form.
    """
    z = complex(z)
    if z.imag == 0:
        raise DomainError("cauchy_eval needs z off the real line; use the projections on it")
    f = np.asarray(f, dtype=complex)
    k, d, K = grid.k_nodes, grid.dk, grid.k_max
    w = np.full(len(k), d)
    w[0] = w[-1] = 0.5 * d
    val = np.sum(w * f / (k - z)) / (2j * np.pi)
    c1, c2 = _tail_fit((k[-1], k[-2]), (f[-1], f[-2]))
    d1, d2 = _tail_fit((k[0], k[1]), (f[0], f[1]))

    def tails(c1, c2, zz):
        # integral_K^inf (c1/s + c2/s^2)/(s - zz) ds
        lg = np.log(1 - zz / K)
        return c1 * (-lg / zz) + c2 * (-lg / zz ** 2 - 1 / (zz * K))

    # left tail: s = -sigma, f(-sigma) = -d1/sigma + d2/sigma^2, 1/(s-z) = -1/(sigma+z)
    t = tails(c1, c2, z) - tails(-d1, d2, -z)
    t = t / (2j * np.pi)
    if tail:
        val = val + t
        est = abs(t) * 1e-3
    else:
        est = abs(t)
    return val, est
