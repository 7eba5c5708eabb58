"""Independent oracles: ODE scattering in x, a pseudospectral time stepper,
the PDE residual and the Lax compatibility residual."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicSpline

from . import fourier
from .errors import DomainError, GridMismatchError, StepperError
from .grids import k_of_z, lam_of_z
from .reconstruct import helmholtz_u

SIGMA3 = np.diag([1.0 + 0j, -1.0])


@dataclass
class OracleReport:
    name: str
    max_abs_error: float
    rel_error: float
    tolerance: float
    passed: bool = False
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(np.isfinite(self.rel_error) and self.rel_error <= self.tolerance)

    def to_dict(self):
        return asdict(self)


# -- scattering in the original variable ----------------------------------

def ode_oracle_scattering(m0, x, z, rtol=1e-11, atol=1e-13, m_func=None):
    """a(z), b(z) for real z by integrating Phi_x = X Phi in x with DOP853.

    Interaction picture Phi = exp(-(ik/4) x s3) Psi; the left state is
    Phi = exp(-(ik/4)(x - L) s3) with L = integral of (q - 1), and S = Psi(x_R)
    because the right state is exp(-(ik/4) x s3). Only the first column is needed.
    """
    x = np.asarray(x, dtype=float)
    z = np.atleast_1d(np.asarray(z))
    if np.iscomplexobj(z):
        if np.any(z.imag != 0):
            raise DomainError("the oracle takes real z")
        z = z.real
    z = z.astype(float)
    if np.any(z == 0):
        raise DomainError("the oracle takes real z off 0")
    m_func = m_func or CubicSpline(x, np.asarray(m0, dtype=float))
    lo, hi = float(x[0]), float(x[-1])
    L, _ = quad(lambda s: np.sqrt(1.0 + m_func(s) ** 2) - 1.0, lo, hi, limit=500,
                epsabs=1e-14, epsrel=1e-13)
    k = k_of_z(z).real
    lam = lam_of_z(z).real

    def rhs(s, v):
        half = 0.5 * lam * m_func(s)
        ph = np.exp(0.5j * k * s)
        top, bot = v[: len(z)], v[len(z):]
        return np.concatenate([half * ph * bot, -half * top / ph])

    v0 = np.concatenate([np.exp(0.25j * k * L), np.zeros(len(z), dtype=complex)])
    sol = solve_ivp(rhs, (lo, hi), v0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise StepperError(f"ODE oracle step control failed: {sol.message}")
    end = sol.y[:, -1]
    return end[: len(z)], end[len(z):]


def scattering_report(a, b, a_ref, b_ref, tol=1e-6, name="ode-vs-volterra"):
    """Relative error (|da| + |db|)/(|a| + |b|), worst over the samples."""
    err = np.abs(a - a_ref) + np.abs(b - b_ref)
    rel = err / (np.abs(a_ref) + np.abs(b_ref))
    return OracleReport(name, float(err.max()), float(rel.max()), tol,
                        diagnostics={"samples": int(len(err))})


# -- pseudospectral stepper -----------------------------------------------

@dataclass
class StepperRun:
    x: np.ndarray
    times: np.ndarray
    snapshots: np.ndarray  # (len(times), n)
    invariant: np.ndarray  # conserved_density at each output time
    dt: float
    kappa: float

    @property
    def invariant_drift(self) -> float:
        return float(np.max(np.abs(self.invariant - self.invariant[0])))


def _velocity(m, xi):
    mh = np.fft.fft(m)
    uh = mh / (1.0 + xi * xi)
    return np.fft.ifft(uh).real, np.fft.ifft(1j * xi * uh).real


def mch_rhs(m, xi, kappa=1.0):
    """-(m (u^2 - u_x^2))_x - kappa u_x on a periodic grid."""
    u, ux = _velocity(m, xi)
    flux = m * (u * u - ux * ux)
    return -np.fft.ifft(1j * xi * np.fft.fft(flux)).real - kappa * ux


def fd_mch_step(m, dt, h, kappa=1.0, cfl=0.5):
    """One classical RK4 step; the grid is periodic with spacing h."""
    m = np.asarray(m, dtype=float)
    xi = fourier.wavenumbers(len(m), h)
    u, ux = _velocity(m, xi)
    speed = float(np.max(np.abs(u * u - ux * ux)))
    if dt * speed * np.pi / h > cfl:
        raise StepperError(f"CFL violated: dt = {dt:.3g}, speed = {speed:.3g}, h = {h:.3g}")
    k1 = mch_rhs(m, xi, kappa)
    k2 = mch_rhs(m + 0.5 * dt * k1, xi, kappa)
    k3 = mch_rhs(m + 0.5 * dt * k2, xi, kappa)
    k4 = mch_rhs(m + dt * k3, xi, kappa)
    return m + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0


def conserved_density(m, h, kappa=1.0):
    """integral of sqrt(1 + 2 m^2/kappa) - 1, the invariant of the rescaled native flow."""
    return float(np.sum(np.sqrt(1.0 + 2.0 * m * m / kappa) - 1.0) * h)


def fd_mch_evolve(m0, x, times, kappa=1.0, dt=1e-3, blowup=10.0, edge_tol=1e-8) -> StepperRun:
    """March to each requested time with RK4; x is a uniform grid treated as periodic."""
    x = np.asarray(x, dtype=float)
    h = x[1] - x[0]
    m = np.asarray(m0, dtype=float).copy()
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise StepperError("output times must be nonnegative and ascending")
    peak = max(np.max(np.abs(m)), 1e-300)
    t, out, inv = 0.0, [], []
    for target in times:
        while t < target - 1e-14:
            step = min(dt, target - t)
            m = fd_mch_step(m, step, h, kappa)
            t += step
            if not np.all(np.isfinite(m)) or np.max(np.abs(m)) > blowup * peak:
                raise StepperError(f"blow-up detected at t = {t:.4g}")
        if max(abs(m[0]), abs(m[-1])) > edge_tol:
            raise StepperError(f"the solution reached the periodic boundary at t = {t:.4g}")
        out.append(m.copy())
        inv.append(conserved_density(m, h, kappa))
    return StepperRun(x, times, np.array(out), np.array(inv), dt, kappa)


def fd_mch_residual(snapshots, dt, x, kappa=1.0):
    """Relative L2 residual of m_t + (m(u^2 - u_x^2))_x + kappa u_x at the middle snapshot.

    snapshots: m at t - dt, t, t + dt on the common uniform grid x. The scale is
    the sum of the L2 norms of the three terms, so the zero field gives 0.
    """
    x = np.asarray(x, dtype=float)
    snaps = [np.asarray(s, dtype=float) for s in snapshots]
    if len(snaps) != 3 or any(s.shape != x.shape for s in snaps):
        raise GridMismatchError("need three snapshots sampled on the same x grid")
    h = x[1] - x[0]
    if np.ptp(np.diff(x)) > 1e-9 * h:
        raise GridMismatchError("x must be uniform")
    m = snaps[1]
    mt = (snaps[2] - snaps[0]) / (2.0 * dt)
    u, ux = helmholtz_u(m, x)
    flux_x = fourier.derivative(m * (u * u - ux * ux), h)
    res = mt + flux_x + kappa * ux
    scale = np.linalg.norm(mt) + np.linalg.norm(flux_x) + np.linalg.norm(kappa * ux)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(res) / scale)


# -- Lax compatibility in (y, t) ------------------------------------------

def _check_reference_z(z):
    z = complex(z)
    if min(abs(z), abs(z - 1j), abs(z + 1j)) < 1e-12:
        raise DomainError("the reference z must avoid 0 and +-i")
    return z


def lax_matrices(exp, z=2.0):
    """A and B with Psi_y = A Psi, Psi_t = B Psi, Psi = M exp(i Theta s3).

    A = -(iz/4) s3 + (i/2)[[0, M1_12], [-M1_21, 0]] + (i/4z) M(0) s3 M(0)^{-1}, M1 = lim z(M - I);
    B = principal parts at +-i of i (2k/(k^2+4)) M s3 M^{-1}, built from M(+-i), M'(+-i).
    """
    z = _check_reference_z(z)
    M1 = exp.Minf1
    M0 = exp.M0
    A = (-0.25j * z * SIGMA3
         + 0.5j * np.array([[0, M1[0, 1]], [-M1[1, 0], 0]])
         + 0.25j / z * M0 @ SIGMA3 @ np.linalg.inv(M0))

    def parts(Mp, dMp):
        inv = np.linalg.inv(Mp)
        N0 = Mp @ SIGMA3 @ inv
        D = dMp @ inv
        return N0, D @ N0 - N0 @ D

    N0, N1 = parts(exp.Mi, exp.Mi1)
    P0, P1 = parts(exp.Mmi, exp.Mmi1)
    B = (-N0 / (z - 1j) ** 2 + (1j * N0 - N1) / (z - 1j)
         + P0 / (z + 1j) ** 2 + (1j * P0 + P1) / (z + 1j))
    return A, B


def lax_compatibility_residual(expansions_at, y, t, h, z=2.0):
    """max |A_t - B_y + [A, B]| at (y, t) with centred differences of step h.

    expansions_at(y, t) returns the expansion coefficients of M there.
    """
    z = _check_reference_z(z)
    A, B = lax_matrices(expansions_at(y, t), z)
    At = (lax_matrices(expansions_at(y, t + h), z)[0] - lax_matrices(expansions_at(y, t - h), z)[0]) / (2 * h)
    By = (lax_matrices(expansions_at(y + h, t), z)[1] - lax_matrices(expansions_at(y - h, t), z)[1]) / (2 * h)
    return float(np.max(np.abs(At - By + A @ B - B @ A)))


def observed_order(hs, errors):
    """Least-squares slope of log(error) against log(h)."""
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


# -- invariant suite ----------------------------------------------------------

@dataclass
class SuiteConfig:
    kappa: float = 1.0
    k_max: float = 24.0
    n_k: int = 1024
    small_n_k: int = 256  # grid of the Neumann vs dense comparison
    times: tuple = (0.25, 0.5)
    residual_time: float = 0.3
    residual_step: float = 1e-3
    x_window: float = 10.0
    fd_half_width: float = 40.0
    fd_n: int = 1024
    fd_dt: float = 2e-3
    oracle_samples: int = 64
    time_sign: float = 1.0  # -1 flips the time flow (mutation test)
    seed: int = 0
    checks: tuple | None = None  # run a subset by name


def _relative(diff, ref):
    n_ref = float(np.linalg.norm(ref))
    n_diff = float(np.linalg.norm(diff))
    return n_diff / n_ref if n_ref > 0 else n_diff


class _Suite:
    def __init__(self, m0, x, cfg: SuiteConfig):
        from .grids import SpectralGrid
        from .pipeline import run_forward

        self.m0 = np.asarray(m0, dtype=float)
        self.x = np.asarray(x, dtype=float)
        self.cfg = cfg
        self.run = run_forward(self.m0, self.x, SpectralGrid(cfg.k_max, cfg.n_k), cfg.kappa)
        self._fd = None
        self._m_func = CubicSpline(self.x, self.m0)

    def y_grid(self, t, spacing=0.05):
        from .pipeline import y_window

        lo, hi = y_window(self.run, t, margin=1.0)
        return np.linspace(lo, hi, int(np.ceil((hi - lo) / spacing)) + 1)

    def fd_run(self):
        if self._fd is None:
            c = self.cfg
            xf = np.linspace(-c.fd_half_width, c.fd_half_width, c.fd_n, endpoint=False)
            mf = np.where(np.abs(xf) <= self.x[-1], self._m_func(np.clip(xf, self.x[0], self.x[-1])), 0.0)
            self._fd = fd_mch_evolve(mf, xf, (0.0,) + tuple(c.times) + (1.0,) * (max(c.times) < 1.0),
                                     c.kappa, c.fd_dt)
        return self._fd

    def x_eval(self):
        w = self.cfg.x_window
        return np.linspace(-w, w, int(40 * w) + 1)

    # each check returns an OracleReport
    def unitarity(self):
        sd = self.run.data
        err = float(np.max(np.abs(np.abs(sd.a) ** 2 + np.abs(sd.b) ** 2 - 1.0)))
        return OracleReport("unitarity", err, err, 1e-8)

    def a_at_i(self):
        from .direct import a_at

        a_i = complex(a_at(self.run.profile, 1j)[0])
        ref = np.exp(-0.5 * self.run.profile.mass)
        err = abs(a_i - ref)
        return OracleReport("a_at_i", err, err / ref, 1e-6, diagnostics={"a_i": [a_i.real, a_i.imag]})

    def reflection_symmetry(self):
        """r(1/z) = conj r(z) and r(-1/z) = -r(z) on grid pairs, |rtilde| = |r|."""
        sd = self.run.data
        r = sd.r
        inv = float(np.max(np.abs(r[0] + r[1])))  # z_minus(k) = -1/z_plus(k)
        conj = float(np.max(np.abs(r[0][::-1] - np.conj(r[0]))))  # z_plus(-k) = 1/z_plus(k)
        mod = float(np.max(np.abs(np.abs(sd.rtilde) - np.abs(r))))
        err = max(inv, conj, mod)
        return OracleReport("reflection_symmetry", err, err, 1e-8,
                            diagnostics={"inversion": inv, "conjugation": conj, "modulus": mod})

    def spectral_limits(self):
        from .direct import spectral_limits

        lim = spectral_limits(self.run.data)
        diag = {"a0": abs(lim["a"] - 1.0), "b0": abs(lim["b"]), "r0": abs(lim["r"])}
        err = float(max(diag.values()))
        return OracleReport("spectral_limits", err, err, 1e-5, diagnostics=diag)

    def ode_oracle(self):
        sd = self.run.data
        n = self.cfg.oracle_samples // 2
        g = sd.grid
        idx = np.linspace(1, g.n - 2, n).astype(int)
        z = np.concatenate([g.z_nodes[0, idx], g.z_nodes[1, idx]])
        s = self.run.scaling
        a, b = ode_oracle_scattering(None, self.x, z, m_func=lambda u: self._m_func(u) / s.s)
        return scattering_report(a, b, np.concatenate([sd.a[0, idx], sd.a[1, idx]]),
                                 np.concatenate([sd.b[0, idx], sd.b[1, idx]]), 1e-6, "ode_oracle")

    def neumann_vs_dense(self):
        from .direct import forward
        from .grids import SpectralGrid
        from .rhp import build_jump, solve_mu
        from .timeflow import PhaseSpec

        g = SpectralGrid(min(self.cfg.k_max, 12.0), self.cfg.small_n_k)
        sd = forward(self.run.profile, g)
        worst = 0.0
        for y, side in ((0.5, "left"), (-0.5, "right")):
            jump = build_jump(sd, PhaseSpec(y, 0.0), side)
            a = solve_mu(jump, "neumann").mu
            b = solve_mu(jump, "dense").mu
            worst = max(worst, float(np.max(np.abs(a - b))))
        return OracleReport("neumann_vs_dense", worst, worst, 1e-9)

    def operator_bounds(self):
        from .reconstruct import solve_point

        worst = 0.0
        for t in (0.0,) + tuple(self.cfg.times):
            tau = float(self.run.scaling.native_time(t))
            for y in (-3.0, -0.5, 0.0, 0.5, 3.0):
                nrm = solve_point(self.run.data, y, tau, self.run.ctx, time_sign=self.cfg.time_sign).norms
                r2, rinf = nrm["r_l2"], nrm["r_linf"]
                if r2 == 0:
                    continue
                worst = max(worst, nrm["mu_minus_I"] / (2 * r2),
                            nrm["Mplus_minus_I"] / ((2 * rinf + 1) * r2),
                            nrm["Mminus_minus_I"] / ((2 * rinf + 1) * r2))
        return OracleReport("operator_bounds", worst, worst, 1.0)

    def projections(self):
        """Plemelj C+ - C- = I and contraction of C+-, on a random smooth function."""
        from .rhp import line_norm

        g = self.run.data.grid
        rng = np.random.default_rng(self.cfg.seed)
        coef = rng.standard_normal((2, 8)) + 1j * rng.standard_normal((2, 8))
        k = g.k_nodes
        basis = np.array([np.exp(-((k - c) / 2.0) ** 2) for c in np.linspace(-6, 6, 8)])
        f = coef @ basis
        cp, cm = self.run.ctx.project_z(f, "plus"), self.run.ctx.project_z(f, "minus")
        plemelj = float(np.max(np.abs(cp - cm - f)))
        ratio = max(line_norm(cp, g), line_norm(cm, g)) / line_norm(f, g)
        return OracleReport("projections", plemelj, plemelj if ratio <= 1 + 1e-12 else np.inf, 1e-10,
                            diagnostics={"contraction_ratio": float(ratio)})

    def roundtrip(self):
        from .pipeline import roundtrip_error

        err, _ = roundtrip_error(self.run, self.m0, self.x, self.cfg.x_window)
        return OracleReport("roundtrip", err, err, 1e-4)

    def coherence(self):
        from .reconstruct import reconstruct_field, solve_point

        ys = self.y_grid(0.0, 0.05)
        fs = reconstruct_field(self.run.data, ys, 0.0, self.run.ctx)
        q, m = fs.q_y, fs.m_y
        spl = CubicSpline(ys, fs.x_of_y)
        xy = spl.derivative()(ys)
        mx = CubicSpline(ys, m).derivative()(ys) / xy
        eta_err = float(np.max(np.abs(fs.eta_y - mx / q ** 3)))
        left = solve_point(self.run.data, 0.0, 0.0, self.run.ctx, side="left")
        right = solve_point(self.run.data, 0.0, 0.0, self.run.ctx, side="right")
        lr = max(abs(left.q - right.q), abs(left.m - right.m), abs(left.x - right.x), abs(left.eta - right.eta))
        diag = {
            "q_min": float(q.min()),
            "q_identity": float(np.max(np.abs(q * q - 1 - m * m))),
            "dx_dy": [float(xy.min()), float(xy.max())],
            "eta": eta_err,
            "left_right": float(lr),
        }
        bad = (q.min() < 1.0 - 1e-12 or diag["q_identity"] > 1e-7 or xy.min() <= 0 or xy.max() >= 2
               or eta_err > 1e-5 or lr > 1e-7)
        worst = max(diag["q_identity"], lr)
        return OracleReport("coherence", worst, np.inf if bad else worst, 1e-7, diagnostics=diag)

    def dynamics(self):
        import warnings

        from .pipeline import inverse

        fd = self.fd_run()
        xe = self.x_eval()
        worst = 0.0
        per = {}
        for i, t in enumerate(self.cfg.times):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")  # u is not compared here
                snap = inverse(self.run, t, self.y_grid(t), xe, time_sign=self.cfg.time_sign)
            ref = CubicSpline(fd.x, fd.snapshots[i + 1])(xe)
            per[str(t)] = _relative(snap.m - ref, ref)
            worst = max(worst, per[str(t)])
        return OracleReport("dynamics", worst, worst, 1e-3, diagnostics=per)

    def pde_residual(self):
        import warnings

        from .pipeline import inverse

        c = self.cfg
        xe = np.linspace(-self.x[-1], self.x[-1], 961)
        ys = self.y_grid(c.residual_time + c.residual_step, 0.04)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            snaps = [inverse(self.run, c.residual_time + s * c.residual_step, ys, xe, time_sign=c.time_sign).m
                     for s in (-1, 0, 1)]
        res = fd_mch_residual(snaps, c.residual_step, xe, c.kappa)
        return OracleReport("pde_residual", res, res, 1e-3)

    def conservation(self):
        fd = self.fd_run()
        drift = fd.invariant_drift
        return OracleReport("conservation", drift, drift, 1e-6, diagnostics={"initial": float(fd.invariant[0])})

    def lax_order(self):
        from .reconstruct import solve_point

        tau = float(self.run.scaling.native_time(self.cfg.residual_time))

        def expansions_at(y, t):
            return solve_point(self.run.data, y, t, self.run.ctx, time_sign=self.cfg.time_sign).expansions

        hs = [4e-2, 2e-2, 1e-2]
        res = [lax_compatibility_residual(expansions_at, 0.8, tau, h) for h in hs]
        if max(res) < 1e-13:
            return OracleReport("lax_order", max(res), 0.0, 0.3, diagnostics={"residuals": res})
        order = observed_order(hs, res)
        return OracleReport("lax_order", max(res), abs(order - 2.0), 0.3,
                            diagnostics={"residuals": res, "order": order})

    def time_flow(self):
        """Scatter the stepper solution at the last time and compare with the evolved data."""
        from .direct import forward, prepare_profile
        from .timeflow import evolve_scattering

        fd = self.fd_run()
        i = len(self.cfg.times)
        t = self.cfg.times[-1]
        s = self.run.scaling
        prof = prepare_profile(s.native_field(fd.snapshots[i]), fd.x, decay_tol=1e-8)
        sd_t = forward(prof, self.run.data.grid)
        ev = evolve_scattering(self.run.data, float(s.native_time(t)), self.cfg.time_sign)
        k = self.run.data.grid.k_nodes
        inner = np.abs(k) <= 10.0
        b_ref = sd_t.b[:, inner]
        diff = ev.b_at()[:, inner] - b_ref
        err = float(np.max(np.abs(diff)))
        rel = err / max(float(np.max(np.abs(b_ref))), 1e-300)
        return OracleReport("time_flow", err, rel if err > 1e-12 else 0.0, 1e-4)


SUITE_CHECKS = ("unitarity", "a_at_i", "reflection_symmetry", "spectral_limits", "ode_oracle",
                "neumann_vs_dense", "operator_bounds", "projections", "roundtrip", "coherence",
                "dynamics", "pde_residual", "conservation", "lax_order", "time_flow")


def run_invariant_suite(m0, x, config: SuiteConfig | None = None):
    """Run every check; a check that raises becomes a failed report carrying the error."""
    cfg = config or SuiteConfig()
    suite = _Suite(m0, x, cfg)
    reports = []
    for name in cfg.checks or SUITE_CHECKS:
        try:
            reports.append(getattr(suite, name)())
        except Exception as exc:  # failures are report entries
            reports.append(OracleReport(name, np.inf, np.inf, 0.0,
                                        diagnostics={"error": f"{type(exc).__name__}: {exc}",
                                                     "module": getattr(exc, "module", "")}))
    return reports
