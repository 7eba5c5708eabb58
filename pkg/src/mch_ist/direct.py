"""Jost solutions, scattering coefficients and reflection data for a decaying profile m0."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fourier
from .errors import ContourResolutionError, DecayError, DomainError, MonotonicityError, ResonanceError
from .grids import SpectralGrid, k_of_z
from .kernels import jost_rk4

DECAY_TOL = 1e-12
RESONANCE_MARGIN = 1e-3


@dataclass
class ProfileData:
    x: np.ndarray
    m0: np.ndarray
    mx: np.ndarray
    q: np.ndarray
    y_of_x: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray
    mass: float  # integral of q - 1 over the line
    p_offdiag: np.ndarray  # i m_x / (2 q^3)
    p_pole: np.ndarray  # m / (2 q^2), multiplies 1/z
    norm_report: dict = field(default_factory=dict)

    @property
    def h(self) -> float:
        return self.x[1] - self.x[0]

    def inverse_gauge(self):
        """F(y)^{-2} = (1/q) [[1, i m], [i m, 1]] at every node, shape (n, 2, 2)."""
        out = np.empty((len(self.x), 2, 2), dtype=complex)
        out[:, 0, 0] = out[:, 1, 1] = 1.0 / self.q
        out[:, 0, 1] = out[:, 1, 0] = 1j * self.m0 / self.q
        return out


def prepare_profile(m0, x, decay_tol=DECAY_TOL) -> ProfileData:
    x = np.asarray(x, dtype=float)
    m0 = np.asarray(m0, dtype=float)
    if x.ndim != 1 or len(x) != len(m0) or len(x) < 16:
        raise ValueError("m0 and x must be 1-D arrays of equal length >= 16")
    h = np.diff(x)
    if np.any(h <= 0) or np.ptp(h) > 1e-9 * abs(h[0]):
        raise ValueError("x must be a uniform increasing grid")
    if max(abs(m0[0]), abs(m0[-1])) > decay_tol:
        raise DecayError(f"m0 does not decay at the grid ends: {abs(m0[0]):.3g}, {abs(m0[-1]):.3g}")
    if not np.all(np.isfinite(m0)):
        raise MonotonicityError("m0 has non-finite samples")
    q = np.sqrt(1.0 + m0 * m0)
    mx = fourier.derivative(m0, h[0])
    c_minus = fourier.cumulative_integral(x, q - 1.0)
    mass = float(c_minus[-1])
    c_plus = c_minus - mass
    y_of_x = x + c_plus
    if np.any(np.diff(y_of_x) <= 0):
        raise MonotonicityError("y(x) is not strictly increasing")
    norms = {
        "l1": float(np.sum(np.abs(m0)) * h[0]),
        "l2": float(np.sqrt(np.sum(m0 * m0) * h[0])),
        "linf": float(np.max(np.abs(m0))),
        "h1": float(np.sqrt(np.sum(m0 * m0 + mx * mx) * h[0])),
        "weighted_l2": float(np.sqrt(np.sum((1 + x * x) * m0 * m0) * h[0])),
        "mass": mass,
    }
    return ProfileData(
        x=x, m0=m0, mx=mx, q=q, y_of_x=y_of_x, c_plus=c_plus, c_minus=c_minus, mass=mass,
        p_offdiag=1j * mx / (2 * q ** 3), p_pole=m0 / (2 * q * q), norm_report=norms,
    )


@dataclass
class JostSolution:
    z: np.ndarray
    side: str
    x: np.ndarray
    y: np.ndarray
    mu: np.ndarray  # (nz, nx, 2, 2), or (nz, 1, 2, 2) at the far end only
    step: float
    refine: int


def _refinement(profile: ProfileData, z) -> int:
    kmax = np.max(np.abs(k_of_z(np.asarray(z)))) if np.size(z) else 0.0
    qmax = np.max(profile.q)
    step_max = min(profile.h, np.pi / (4.0 * max(kmax, 1e-300) * qmax))
    return max(1, int(np.ceil(profile.h / step_max - 1e-12)))


def _fine_tables(profile: ProfileData, p: int):
    m = fourier.refine(profile.m0, 2 * p)
    mx = fourier.refine(profile.mx, 2 * p)
    q = np.sqrt(1.0 + m * m)
    return m, mx, q


def _column_region_check(z, column, side):
    if column is None:
        return
    im = np.imag(z)
    # mu_-: column 0 analytic above, column 1 below; mu_+ the other way round
    upper = (side == "minus") == (column == 0)
    bad = im < 0 if upper else im > 0
    if np.any(bad):
        raise DomainError(f"column {column} of mu_{side} is not analytic at the requested z")


def solve_jost(profile: ProfileData, z, side="minus", record=True, column=None, backend=None) -> JostSolution:
    """Integrate mu_y = -(ik/4)[s3, mu] + P mu (written in x) from the normalising end.

    side='minus' starts from I at the left end, side='plus' at the right end.
    With record=True the matrices are returned at every x node.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z == 0):
        raise DomainError("Jost solutions are evaluated for z != 0")
    if side not in ("minus", "plus"):
        raise ValueError("side must be 'minus' or 'plus'")
    _column_region_check(z, column, side)
    p = _refinement(profile, z)
    m, mx, q = _fine_tables(profile, p)
    step = profile.h / p
    if side == "plus":
        m, mx, q, step = m[::-1].copy(), mx[::-1].copy(), q[::-1].copy(), -step
    final, traj = jost_rk4(z, m, mx, q, step, record_every=p if record else 0, backend=backend)
    if record:
        mu = traj[:, ::-1] if side == "plus" else traj
    else:
        mu = final[:, None]
    if not np.all(np.isfinite(mu)):
        from .errors import NonConvergenceError

        raise NonConvergenceError("Jost integration produced non-finite values")
    return JostSolution(z=z, side=side, x=profile.x, y=profile.y_of_x, mu=mu, step=abs(step), refine=p)


@dataclass
class ScatteringData:
    grid: SpectralGrid
    a: np.ndarray  # (2, n): rows are the z_plus and z_minus branches
    b: np.ndarray
    r: np.ndarray
    rtilde: np.ndarray
    rho: np.ndarray
    log_a_i: complex  # ln a(i), used by the right-normalised reconstruction
    discrete: list = field(default_factory=list)  # (z_j, c_j, ctilde_j)
    resonance_margin: float = 1.0
    norm_report: dict = field(default_factory=dict)


def scattering_pair(profile: ProfileData, grid: SpectralGrid, backend=None):
    """a and b on both branches of the spectral grid, shape (2, n) each.

    S = mu_+^{-1} mu_- is independent of the slice; at the right end mu_+ = I,
    so a = mu_-,11 and b = mu_-,21 exp(-i k y / 2) there.
    """
    z = grid.z_nodes.ravel()
    sol = solve_jost(profile, z, "minus", record=False, backend=backend)
    end = sol.mu[:, -1]
    y_end = profile.y_of_x[-1]
    k = np.tile(grid.k_nodes, 2)
    a = end[:, 0, 0]
    b = end[:, 1, 0] * np.exp(-0.5j * k * y_end)
    return a.reshape(2, -1), b.reshape(2, -1)


def a_at(profile: ProfileData, z, backend=None):
    """Analytic continuation of a into the closed upper half plane."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    sol = solve_jost(profile, z, "minus", record=False, column=0, backend=backend)
    return sol.mu[:, -1, 0, 0]


def reflection_data(a, b, margin=RESONANCE_MARGIN):
    """r = b/a, rtilde = b/conj(a), rho(k) = r(z_plus(k))."""
    a = np.asarray(a)
    b = np.asarray(b)
    res = float(np.min(np.abs(a))) if a.size else 1.0
    if res <= margin:
        raise ResonanceError(f"min |a| on the real line is {res:.3g} <= {margin}")
    r = b / a
    rtilde = b / np.conj(a)
    rho = r[0] if r.ndim == 2 else r
    return r, rtilde, rho


def rho_norms(rho, dk, k):
    d = np.gradient(rho, dk)
    return {
        "linf": float(np.max(np.abs(rho))),
        "l2": float(np.sqrt(np.sum(np.abs(rho) ** 2) * dk)),
        "h11": float(np.sqrt(np.sum((1 + k * k) * (np.abs(rho) ** 2 + np.abs(d) ** 2)) * dk)),
    }


def spectral_limits(sd: ScatteringData, n_tail=20, degree=4):
    """a, b and r at z = 0 from the grid ends (z -> 0 is k -> +-inf on the minus branch).

    ln a ~ c1/k + ... is extrapolated by a polynomial in 1/k over the last n_tail
    nodes; b and r decay faster than any power, so their end values are used.
    The worse of the two ends is returned for each quantity.
    """
    k = sd.grid.k_nodes
    ends = (slice(-n_tail, None), slice(0, n_tail))
    fits = [np.polynomial.polynomial.polyfit(1.0 / k[sl], np.log(sd.a[1, sl]), degree)[0] for sl in ends]
    a0 = complex(np.exp(max(fits, key=abs)))
    b0 = complex(max(sd.b[1, 0], sd.b[1, -1], key=abs))
    r0 = complex(max(sd.r[1, 0], sd.r[1, -1], key=abs))
    return {"a": a0, "b": b0, "r": r0}


def log_a_trace(r, grid: SpectralGrid, z):
    """ln a(z) for z in C+ from |r| alone (no discrete spectrum):
    ln a(z) = -(1/2 pi i) int ln(1+|r(s)|^2)/(s - z) ds over the real z-line.
    """
    z = np.asarray(z, dtype=complex)
    s = grid.z_nodes
    g = np.log1p(np.abs(r) ** 2) * grid.dz_dk
    zz = z[..., None, None]
    return -np.sum(g / (s - zz), axis=(-1, -2)) * grid.dk / (2j * np.pi)


def forward(profile: ProfileData, grid: SpectralGrid, backend=None) -> ScatteringData:
    a, b = scattering_pair(profile, grid, backend=backend)
    r, rtilde, rho = reflection_data(a, b)
    log_ai = complex(-0.5 * profile.mass)
    norms = rho_norms(rho, grid.dk, grid.k_nodes)
    norms["tail"] = float(max(np.abs(rho[0]), np.abs(rho[-1])))
    return ScatteringData(
        grid=grid, a=a, b=b, r=r, rtilde=rtilde, rho=rho, log_a_i=log_ai,
        resonance_margin=float(np.min(np.abs(a))), norm_report=norms,
    )


def _rectangle(R, delta, n_side):
    t = np.linspace(0.0, 1.0, n_side, endpoint=False)
    c = [complex(-R, delta), complex(R, delta), complex(R, R), complex(-R, R)]
    pts = [c[i] + (c[(i + 1) % 4] - c[i]) * t for i in range(4)]
    return np.concatenate(pts)


def spectrum_probe(source, R=6.0, delta=0.05, n_side=200, real_a=None, backend=None):
    """Count zeros of a inside [-R, R] x [delta, R] by the argument principle.

    `source` is a ProfileData (a from the Jost column) or a callable a(z).
    Returns (winding, resonance_margin); the margin is min |a| over `real_a`
    when given, else over a real-line sample of the callable.
    """
    zc = _rectangle(R, delta, n_side)
    if isinstance(source, ProfileData):
        vals = a_at(source, zc, backend=backend)
    else:
        vals = np.asarray(source(zc), dtype=complex)
    dphi = np.angle(np.roll(vals, -1) / vals)
    if np.max(np.abs(dphi)) > np.pi / 2:
        raise ContourResolutionError(
            f"phase jump {np.max(np.abs(dphi)):.3g} > pi/2 on the probe contour; raise n_side"
        )
    winding = int(np.rint(np.sum(dphi) / (2 * np.pi)))
    if real_a is not None:
        margin = float(np.min(np.abs(real_a)))
    elif isinstance(source, ProfileData):
        margin = float(np.min(np.abs(a_at(source, np.linspace(-R, R, 4 * n_side) + 0j, backend=backend))))
    else:
        margin = float(np.min(np.abs(source(np.linspace(-R, R, 4 * n_side) + 0j))))
    return winding, margin
