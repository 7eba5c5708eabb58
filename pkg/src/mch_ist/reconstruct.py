"""Field recovery from the RHP: q(y), m(y), x(y), then m(x), u(x), u_x(x)."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from . import fourier
from .cauchy import CauchyContext
from .errors import MonotonicityError, RegimeError
from .rhp import Expansions, build_jump, eval_expansions, solve_mu
from .timeflow import PhaseSpec


@dataclass
class PointField:
    y: float
    q: float
    m: float
    x: float
    eta: complex
    zeta: complex
    side: str
    expansions: Expansions
    residual: float = 0.0
    iterations: int = 0
    norms: dict = field(default_factory=dict)


def field_from_M(exp: Expansions, y: float, side="left", log_a_i=0.0, tol=1e-8) -> PointField:
    """q = 1/beta0, m = eta0/(i beta0), x = y - ln((M12+M22)/(M11+M21) at z = i).

    On the right-normalised problem M_r(i) = M_l(i) a(i)^{s3}, which adds -2 ln a(i).
    """
    beta0, eta0 = exp.M0[0, 0], exp.M0[0, 1]
    if abs(beta0.imag) > tol or beta0.real <= 0:
        raise RegimeError(f"M11(0) = {beta0} is not a positive real number")
    q = 1.0 / beta0.real
    m_c = eta0 / (1j * beta0)
    Mi = exp.Mi
    ratio = (Mi[0, 1] + Mi[1, 1]) / (Mi[0, 0] + Mi[1, 0])
    if abs(ratio.imag) > tol * max(1.0, abs(ratio)) or ratio.real <= 0:
        raise RegimeError(f"log argument {ratio} is not a positive real number")
    x = y - np.log(ratio.real)
    if side == "right":
        x = x - 2.0 * np.real(log_a_i)
    return PointField(y=y, q=q, m=float(m_c.real), x=float(x), eta=exp.eta, zeta=exp.zeta,
                      side=side, expansions=exp)


def solve_point(sd, y, t=0.0, ctx=None, method="auto", time_sign=1.0, side=None) -> PointField:
    strict = side is None
    side = side or ("left" if y >= 0 else "right")
    jump = build_jump(sd, PhaseSpec(y, t, time_sign), side, ctx=ctx, strict=strict)
    sol = solve_mu(jump, method=method)
    exp = eval_expansions(sol)
    pf = field_from_M(exp, y, side, sd.log_a_i)
    pf.residual, pf.iterations, pf.norms = sol.residual, sol.iterations, sol.norms
    return pf


@dataclass
class FieldState:
    t: float
    y_grid: np.ndarray
    q_y: np.ndarray
    m_y: np.ndarray
    x_of_y: np.ndarray
    eta_y: np.ndarray
    zeta_y: np.ndarray
    u_tilde: np.ndarray
    ux_tilde: np.ndarray
    residual: float
    max_iterations: int
    norms: list = field(default_factory=list)
    x_grid: np.ndarray | None = None
    m_x: np.ndarray | None = None
    u_x_frame: np.ndarray | None = None
    ux_x_frame: np.ndarray | None = None
    jacobian: tuple | None = None


def reconstruct_field(sd, y_grid, t=0.0, ctx=None, method="auto", time_sign=1.0, workers=1) -> FieldState:
    ctx = ctx or CauchyContext(sd.grid)
    y_grid = np.asarray(y_grid, dtype=float)

    def one(y):
        return solve_point(sd, y, t, ctx, method, time_sign)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            pts = list(ex.map(one, y_grid))
    else:
        pts = [one(y) for y in y_grid]
    return assemble_field(pts, t, y_grid)


def assemble_field(pts, t, y_grid) -> FieldState:
    vel = np.array([velocity_from_Mi(p.expansions) for p in pts])
    return FieldState(
        t=t, y_grid=np.asarray(y_grid, dtype=float),
        q_y=np.array([p.q for p in pts]),
        m_y=np.array([p.m for p in pts]),
        x_of_y=np.array([p.x for p in pts]),
        eta_y=np.array([p.eta for p in pts]),
        zeta_y=np.array([p.zeta for p in pts]),
        u_tilde=vel[:, 0], ux_tilde=vel[:, 1],
        residual=max(p.residual for p in pts),
        max_iterations=max(p.iterations for p in pts),
        norms=[p.norms for p in pts],
    )


def _invert_monotone(ys, xs, x_eval):
    """y(x) for the C2 spline x(y); PCHIP start, Newton polish."""
    spl = CubicSpline(ys, xs)
    d = spl.derivative()
    y = PchipInterpolator(xs, ys)(x_eval)
    for _ in range(8):
        step = (spl(y) - x_eval) / d(y)
        y = np.clip(y - step, ys[0], ys[-1])
        if np.max(np.abs(step)) < 1e-14:
            break
    return y, spl


def coordinate_resample(fs: FieldState, x_grid) -> FieldState:
    ys, xs = fs.y_grid, fs.x_of_y
    if np.any(np.diff(xs) <= 0):
        raise MonotonicityError("x(y) is not strictly increasing")
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.min() < xs[0] or x_grid.max() > xs[-1]:
        raise MonotonicityError("x grid reaches outside the reconstructed range")
    y_of_x, spl = _invert_monotone(ys, xs, x_grid)
    jac = spl.derivative()(ys)
    fs.jacobian = (float(jac.min()), float(jac.max()))
    fs.x_grid = x_grid
    fs.m_x = CubicSpline(ys, fs.m_y)(y_of_x)
    return fs


def helmholtz_u(m, x, pad=4, decay_tol=1e-8):
    """u = (e^{-|x|}/2) * m and u_x, evaluated in Fourier space on a zero-padded grid.

    The padded periodic Green's function differs from e^{-|x|}/2 by O(e^{-L_pad}).
    """
    m = np.asarray(m, dtype=float)
    h = x[1] - x[0]
    edge = max(abs(m[0]), abs(m[-1]))
    if edge > decay_tol:
        warnings.warn(f"m does not decay at the grid ends ({edge:.3g}); u may be contaminated")
    n = len(m)
    N = pad * n
    mp = np.zeros(N)
    mp[:n] = m
    xi = fourier.wavenumbers(N, h)
    uh = np.fft.fft(mp) / (1.0 + xi * xi)
    u = np.fft.ifft(uh).real[:n]
    ux = np.fft.ifft(1j * xi * uh).real[:n]
    return u, ux


def attach_velocity(fs: FieldState) -> FieldState:
    fs.u_x_frame, fs.ux_x_frame = helmholtz_u(fs.m_x, fs.x_grid)
    return fs


def velocity_from_Mi(exp: Expansions):
    """u~ = -g1/f0 - 2 f0 g2 (beta0-1)/eta0^2, u~_x = g1/f0 - 2 f0 g2 (beta0-1)/eta0^2.

    det M(0) = beta0^2 - eta0^2 = 1 gives (beta0-1)/eta0^2 = 1/(beta0+1),
    which is also the eta0 -> 0 limit.
    """
    f0, g1, g2, beta0 = exp.f0, exp.g1, exp.g2, exp.beta0
    if f0 == 0:
        raise RegimeError("f0 = M11(i) vanishes")
    c = 2.0 * f0 * g2 / (beta0 + 1.0)
    return (-g1 / f0 - c).real, (g1 / f0 - c).real
