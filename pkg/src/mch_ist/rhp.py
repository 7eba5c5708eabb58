"""Beals-Coifman solution of the normalised Riemann-Hilbert problems.

The density mu lives on both real z branches, stored as (row, col, branch, k).
With alpha = r exp(-2i Theta) and beta = conj(r) exp(2i Theta) the equations are

    left  (r):       mu_i1 = d_i1 + C_-(alpha mu_i2),  mu_i2 = d_i2 + C_+(beta mu_i1)
    right (rtilde):  mu_i1 = d_i1 + C_+(alpha mu_i2),  mu_i2 = d_i2 + C_-(beta mu_i1)

plus simple poles: column `col` of M has residue coef * M_other(p) at p.
M(z) = I + C(mu w)(z) + sum_p coef v_p e_col^T / (z - p), with mu w = [alpha mu_:2, beta mu_:1].
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .cauchy import CauchyContext
from .errors import DomainError, NonConvergenceError, SingularSystemError
from .grids import SpectralGrid
from .timeflow import PhaseSpec, theta, theta_k

NEUMANN_TOL = 1e-12
NEUMANN_MAXIT = 200


@dataclass(frozen=True)
class Pole:
    point: complex
    col: int  # column of M that has the pole
    coef: complex  # includes the exp(+-2i Theta) factor

    @property
    def other(self) -> int:
        return 1 - self.col


@dataclass
class JumpState:
    grid: SpectralGrid
    side: str
    phase: PhaseSpec
    alpha: np.ndarray  # (2, n)
    beta: np.ndarray
    poles: list = field(default_factory=list)
    ctx: CauchyContext | None = None

    @property
    def first_side(self):
        return "minus" if self.side == "left" else "plus"

    @property
    def second_side(self):
        return "plus" if self.side == "left" else "minus"

    @property
    def w_plus(self):
        w = np.zeros((2, 2) + self.alpha.shape, dtype=complex)
        if self.side == "left":
            w[1, 0] = self.alpha
        else:
            w[0, 1] = self.beta
        return w

    @property
    def w_minus(self):
        w = np.zeros((2, 2) + self.alpha.shape, dtype=complex)
        if self.side == "left":
            w[0, 1] = self.beta
        else:
            w[1, 0] = self.alpha
        return w

    def jump_matrix(self):
        """V = (I + w_-)(I + w_+), samples (2, 2, 2, n)."""
        I = np.eye(2)[:, :, None, None]
        return np.einsum("ab...,bc...->ac...", I + self.w_minus, I + self.w_plus)


def build_jump(sd, phase: PhaseSpec, side="left", ctx=None, strict=True, reflection=None) -> JumpState:
    """Jump data from scattering data `sd` at (y, t) = (phase.y, phase.t).

    side='left' uses r and is meant for y >= 0, side='right' uses rtilde for y <= 0.
    `reflection` overrides the coefficient array (used by tests and oracles).
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if strict and side == "left" and phase.y < 0:
        raise DomainError("the left-normalised problem is used for y >= 0")
    if strict and side == "right" and phase.y > 0:
        raise DomainError("the right-normalised problem is used for y <= 0")
    grid = sd.grid
    coef = reflection if reflection is not None else (sd.r if side == "left" else sd.rtilde)
    th = theta_k(grid.k_nodes, phase.y, phase.t, phase.time_sign)
    e = np.exp(-2j * th)
    alpha = coef * e
    beta = np.conj(coef) / e
    poles = discrete_poles(getattr(sd, "discrete", []) or [], phase, side)
    return JumpState(grid, side, phase, alpha, beta, poles, ctx or CauchyContext(grid))


def discrete_pole_table(discrete, ys, t=0.0, side="left", time_sign=1.0):
    """Residue conditions for eigenvalues (z_j, c_j, ctilde_j) along many y at one t.

    left:  column 1 at z_j with c_j e_j, column 2 at conj(z_j) with -conj(c_j e_j);
    right: column 2 at z_j with ctilde_j / e_j, column 1 at conj(z_j) with -conj(ctilde_j / e_j);
    e_j = exp(-2i Theta(z_j)). Returns points (P,), cols (P,), coefs (len(ys), P).
    """
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    points, cols, coefs = [], [], []
    for zj, cj, ctj in discrete:
        zj = complex(zj)
        th = theta(zj, 0.0, t, time_sign) - 0.25 * (zj - 1.0 / zj) * ys
        ej = np.exp(-2j * th)
        if side == "left":
            points += [zj, zj.conjugate()]
            cols += [0, 1]
            coefs += [cj * ej, -np.conj(cj * ej)]
        else:
            points += [zj, zj.conjugate()]
            cols += [1, 0]
            coefs += [ctj / ej, -np.conj(ctj / ej)]
    table = np.array(coefs).T if coefs else np.zeros((len(ys), 0), dtype=complex)
    return np.array(points, dtype=complex), np.array(cols, dtype=int), table


def discrete_poles(discrete, phase: PhaseSpec, side="left"):
    """Pole list at one (y, t); see discrete_pole_table."""
    pts, cols, coefs = discrete_pole_table(discrete, [phase.y], phase.t, side, phase.time_sign)
    return [Pole(complex(p), int(c), complex(k)) for p, c, k in zip(pts, cols, coefs[0])]


def apply_K(f, jump: JumpState):
    """C_+(f w_-) + C_-(f w_+) for f of shape (..., 2, 2, 2, n), plus pole terms
    coef * [C(f w)(p)]_other / (s - p) in column col."""
    ctx = jump.ctx
    f = np.asarray(f, dtype=complex)
    out = np.empty_like(f)
    out[..., :, 0, :, :] = ctx.project_z(jump.alpha * f[..., :, 1, :, :], jump.first_side)
    out[..., :, 1, :, :] = ctx.project_z(jump.beta * f[..., :, 0, :, :], jump.second_side)
    if jump.poles:
        fw = _times_w(f, jump)
        s = jump.grid.z_nodes
        for p in jump.poles:
            v = ctx.eval_z(fw[..., :, p.other, :, :], np.array([p.point]))[..., 0]
            out[..., :, p.col, :, :] += p.coef * v[..., :, None, None] / (s - p.point)
    return out


def _times_w(mu, jump):
    fw = np.empty_like(mu)
    fw[..., :, 0, :, :] = jump.alpha * mu[..., :, 1, :, :]
    fw[..., :, 1, :, :] = jump.beta * mu[..., :, 0, :, :]
    return fw


def _continuous_K(mu, jump):
    ctx = jump.ctx
    out = np.empty_like(mu)
    out[..., :, 0, :, :] = ctx.project_z(jump.alpha * mu[..., :, 1, :, :], jump.first_side)
    out[..., :, 1, :, :] = ctx.project_z(jump.beta * mu[..., :, 0, :, :], jump.second_side)
    return out


def _neumann(F, jump, tol=NEUMANN_TOL, maxit=NEUMANN_MAXIT):
    """Fixed-point sweep for (I - K) mu = F (continuous K), columns updated in turn."""
    ctx = jump.ctx
    mu = F.copy()
    scale = max(1.0, float(np.max(np.abs(F))))
    trace = []
    for it in range(1, maxit + 1):
        c0 = F[..., :, 0, :, :] + ctx.project_z(jump.alpha * mu[..., :, 1, :, :], jump.first_side)
        c1 = F[..., :, 1, :, :] + ctx.project_z(jump.beta * c0, jump.second_side)
        d = max(np.max(np.abs(c0 - mu[..., :, 0, :, :])), np.max(np.abs(c1 - mu[..., :, 1, :, :])))
        mu[..., :, 0, :, :] = c0
        mu[..., :, 1, :, :] = c1
        trace.append(float(d))
        if not np.isfinite(d):
            break
        if d <= tol * scale:
            return mu, it, trace
    raise NonConvergenceError(f"Neumann iteration stalled after {len(trace)} sweeps (last change {trace[-1]:.3g})")


def projection_matrix(ctx: CauchyContext, side):
    """Dense (2n x 2n) matrix of the z-line boundary projection on stacked branches."""
    n = ctx.n
    sign = 1.0 if side == "plus" else -1.0
    T = sign * 0.5 * np.eye(n) + 0.5j * ctx.dense_kernel
    zb = ctx.grid.z_nodes
    W = ctx.w0[None, None, :, :] + ctx.w1[None, None, :, :] / zb[:, :, None, None]
    C = T[None, :, None, :] * W
    return C.reshape(2 * n, 2 * n)


def collocation_matrix(jump: JumpState):
    """I - K for one row of mu, unknowns [col0 (2n), col1 (2n)]."""
    n2 = 2 * jump.grid.n
    Cf = projection_matrix(jump.ctx, jump.first_side)
    Cs = projection_matrix(jump.ctx, jump.second_side)
    A = np.eye(2 * n2, dtype=complex)
    A[:n2, n2:] = -Cf * jump.alpha.ravel()[None, :]
    A[n2:, :n2] = -Cs * jump.beta.ravel()[None, :]
    return A


def _dense(F, jump):
    A = collocation_matrix(jump)
    lu, piv = sla.lu_factor(A, check_finite=True)
    d = np.abs(np.diag(lu))
    if d.min() <= 1e-13 * d.max():
        raise SingularSystemError(f"collocation matrix is numerically singular (pivot ratio {d.min() / d.max():.3g})")
    shp = F.shape
    # rows of mu are independent; per (batch, row) the unknowns are [col0, col1]
    rhs = F.reshape(-1, 4 * jump.grid.n).T
    sol = sla.lu_solve((lu, piv), rhs)
    return sol.T.reshape(shp)


@dataclass
class BCSolution:
    mu: np.ndarray  # (2, 2, 2, n)
    jump: JumpState
    pole_values: np.ndarray  # (P, 2): M_other(p) for each pole
    residual: float
    iterations: int
    method: str
    trace: list = field(default_factory=list)
    norms: dict = field(default_factory=dict)


def _pole_forcings(jump):
    s = jump.grid.z_nodes
    out = []
    for p in jump.poles:
        for r in range(2):
            F = np.zeros((2, 2) + s.shape, dtype=complex)
            F[r, p.col] = p.coef / (s - p.point)
            out.append(F)
    return out


def solve_mu(jump: JumpState, method="auto", tol=NEUMANN_TOL, maxit=NEUMANN_MAXIT) -> BCSolution:
    """Solve (I - K)(mu - I) = K(I) together with the pole closure.

    method: 'neumann', 'dense', or 'auto' (Neumann, dense on failure).
    """
    shape = (2, 2) + jump.grid.z_nodes.shape
    I = np.zeros(shape, dtype=complex)
    I[0, 0] = I[1, 1] = 1.0
    forcings = [I] + _pole_forcings(jump)
    F = np.stack(forcings)
    if np.all(jump.alpha == 0) and np.all(jump.beta == 0):
        sols, its, trace, used = F.copy(), 0, [], "trivial"
    elif method == "dense":
        sols, its, trace, used = _dense(F, jump), 0, [], "dense"
    else:
        try:
            sols, its, trace = _neumann(F, jump, tol, maxit)
            used = "neumann"
        except NonConvergenceError:
            if method == "neumann":
                raise
            sols, its, trace, used = _dense(F, jump), 0, [], "dense"
    mu0 = sols[0]
    values = np.zeros((0, 2), dtype=complex)
    if jump.poles:
        mu0, values = _close_poles(sols, jump)
    sol = BCSolution(mu0, jump, values, 0.0, its, used, trace)
    sol.residual = solution_residual(sol)
    if sol.residual > 1e-10 and used != "trivial":
        raise NonConvergenceError(f"linear-system residual {sol.residual:.3g} above 1e-10")
    sol.norms = solution_norms(sol)
    return sol


def _close_poles(sols, jump):
    """Combine basis solutions so that v_p = M_other(p) for every pole."""
    P = len(jump.poles)
    ctx = jump.ctx
    fw = _times_w(sols, jump)  # (B, 2, 2, 2, n)
    pts = np.array([p.point for p in jump.poles])
    G = ctx.eval_z(fw, pts)  # (B, 2, 2, P)
    nb = 2 * P
    A = np.eye(nb, dtype=complex)
    rhs = np.zeros(nb, dtype=complex)
    for a, p in enumerate(jump.poles):
        o = p.other
        for r in range(2):
            row = 2 * a + r
            rhs[row] = (r == o) + G[0, r, o, a]
            for b, q in enumerate(jump.poles):
                for rr in range(2):
                    col = 2 * b + rr
                    A[row, col] -= G[1 + col, r, o, a]
                    if q.col == o and rr == r:
                        A[row, col] -= q.coef / (p.point - q.point)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e13:
        raise SingularSystemError(f"pole closure system is singular (condition {cond:.3g})")
    v = np.linalg.solve(A, rhs)
    mu = sols[0] + np.tensordot(v, sols[1:], axes=(0, 0))
    return mu, v.reshape(P, 2)


def solution_residual(sol: BCSolution) -> float:
    """max |(I - K_c) mu - I - pole forcing| / max |mu|."""
    jump = sol.jump
    mu = sol.mu
    lhs = mu - _continuous_K(mu, jump)
    rhs = np.zeros_like(mu)
    rhs[0, 0] = rhs[1, 1] = 1.0
    s = jump.grid.z_nodes
    for p, v in zip(jump.poles, sol.pole_values):
        rhs[:, p.col] += p.coef * v[:, None, None] / (s - p.point)
    return float(np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(mu))))


def line_norm(f, grid: SpectralGrid):
    """L2 norm over the real z line of samples (..., 2, n), all leading entries summed."""
    w = grid.dz_dk * grid.dk
    return float(np.sqrt(np.sum(np.abs(f) ** 2 * w)))


def boundary_values(sol: BCSolution):
    """M_+ = mu (I + w_+) and M_- = mu (I - w_-) on the line."""
    mu, j = sol.mu, sol.jump
    I = np.eye(2)[:, :, None, None]
    Mp = np.einsum("ab...,bc...->ac...", mu, I + j.w_plus)
    Mm = np.einsum("ab...,bc...->ac...", mu, I - j.w_minus)
    return Mp, Mm


def solution_norms(sol: BCSolution) -> dict:
    g = sol.jump.grid
    coef = np.abs(sol.jump.alpha)
    I = np.eye(2)[:, :, None, None]
    Mp, Mm = boundary_values(sol)
    return {
        "mu_minus_I": line_norm(sol.mu - I, g),
        "r_l2": line_norm(coef, g),
        "r_linf": float(np.max(coef)),
        "Mplus_minus_I": line_norm(Mp - I, g),
        "Mminus_minus_I": line_norm(Mm - I, g),
    }


def eval_M(sol: BCSolution, z):
    """M at points off the real line, shape (2, 2, m)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag == 0):
        raise DomainError("eval_M takes z off the real line; use eval_expansions for z -> 0")
    for p in sol.jump.poles:
        if np.any(np.abs(z - p.point) < 1e-12):
            raise DomainError("M is evaluated at a pole")
    fw = _times_w(sol.mu, sol.jump)
    M = sol.jump.ctx.eval_z(fw, z) + np.eye(2)[:, :, None]
    for p, v in zip(sol.jump.poles, sol.pole_values):
        M[:, p.col] += p.coef * v[:, None] / (z - p.point)
    return M


@dataclass
class Expansions:
    M0: np.ndarray
    Mi: np.ndarray
    Mi1: np.ndarray
    Minf1: np.ndarray  # lim z (M - I)
    eta: complex
    zeta: complex
    Mmi: np.ndarray | None = None  # M(-i)
    Mmi1: np.ndarray | None = None  # M'(-i)

    @property
    def beta0(self):
        return self.M0[0, 0]

    @property
    def eta0(self):
        return self.M0[0, 1]

    @property
    def f0(self):
        return self.Mi[0, 0]

    @property
    def g1(self):
        return self.Mi1[1, 0]

    @property
    def g2(self):
        return self.Mi1[0, 1]


def eval_expansions(sol: BCSolution) -> Expansions:
    """M(0), M(+-i), M'(+-i) and lim z(M - I) from k-line quadratures.

    z -> 0 sends k(z) to infinity along 1/z, leaving (1/2 pi i) int H1 dk;
    at z = +-i, k = +-2i and k' = 0, so M'(+-i) = C^k[H1](+-2i).
    """
    j = sol.jump
    ctx = j.ctx
    dk = j.grid.dk
    fw = _times_w(sol.mu, j)
    H0, H1 = ctx.split(fw)
    I = np.eye(2, dtype=complex)
    M0 = I + H1.sum(-1) * dk / (2j * np.pi)
    c0 = ctx.eval_k(H0, np.array([2j, -2j]))
    c1 = ctx.eval_k(H1, np.array([2j, -2j]))
    Mi = I + c0[..., 0] + c1[..., 0] / 1j
    Mi1 = c1[..., 0].copy()
    Mmi = I + c0[..., 1] + c1[..., 1] / -1j
    Mmi1 = c1[..., 1].copy()
    Minf1 = -H0.sum(-1) * dk / (2j * np.pi)
    for p, v in zip(j.poles, sol.pole_values):
        M0[:, p.col] += p.coef * v / (0.0 - p.point)
        Mi[:, p.col] += p.coef * v / (1j - p.point)
        Mi1[:, p.col] += -p.coef * v / (1j - p.point) ** 2
        Mmi[:, p.col] += p.coef * v / (-1j - p.point)
        Mmi1[:, p.col] += -p.coef * v / (-1j - p.point) ** 2
        Minf1[:, p.col] += p.coef * v
    return Expansions(M0, Mi, Mi1, Minf1, eta=Minf1[0, 1], zeta=-Minf1[1, 1], Mmi=Mmi, Mmi1=Mmi1)


def solve_mu_y(sol: BCSolution) -> np.ndarray:
    """d mu / dy from (I - K) mu_y = (dK/dy) mu (pole-free jumps)."""
    j = sol.jump
    if j.poles:
        raise NotImplementedError("the y-derivative system is implemented without poles")
    k = j.grid.k_nodes
    dj = JumpState(j.grid, j.side, j.phase, 0.5j * k * j.alpha, -0.5j * k * j.beta, [], j.ctx)
    rhs = _continuous_K(sol.mu, dj)
    out, _, _ = _neumann(rhs[None], j)
    return out[0]


def operator_norm_estimate(jump: JumpState, iters=50, seed=0):
    """Power iteration on K^H K with the dense collocation blocks (small grids)."""
    A = np.eye(4 * jump.grid.n, dtype=complex) - collocation_matrix(jump)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(A.shape[0]) + 1j * rng.standard_normal(A.shape[0])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        y = A.conj().T @ (A @ x)
        lam = np.linalg.norm(y)
        x = y / lam
    return float(np.sqrt(lam))
