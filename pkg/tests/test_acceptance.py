"""Acceptance criteria 1-8 at their stated tolerances.

Each test records a `criterion` line; the terminal summary prints one
PASS/FAIL line per criterion after the run.
"""
import time

import numpy as np
import pytest

from mch_ist import direct, grids, pipeline, soliton, validate

FAMILY = (0.05, 0.1, 0.2)
X = np.linspace(-12.0, 12.0, 2401)
KAPPA = 1.0
FAMILY_CHECKS = ("unitarity", "a_at_i", "reflection_symmetry", "spectral_limits", "ode_oracle", "roundtrip")


def gauss(amp):
    return amp * np.exp(-X * X)


def by_name(reports):
    return {r.name: r for r in reports}


@pytest.fixture(scope="module")
def family_reports():
    out = {}
    for amp in FAMILY:
        t0 = time.perf_counter()
        cfg = validate.SuiteConfig(kappa=KAPPA, checks=FAMILY_CHECKS)
        out[amp] = by_name(validate.run_invariant_suite(gauss(amp), X, cfg))
        out[amp]["seconds"] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="module")
def reference_suite():
    """The full invariant suite on the A = 0.1 Gaussian."""
    cfg = validate.SuiteConfig(kappa=KAPPA, times=(0.1, 0.25, 0.5))
    return by_name(validate.run_invariant_suite(gauss(0.1), X, cfg))


def test_criterion_1_roundtrip(family_reports, record_property):
    errs = {a: family_reports[a]["roundtrip"].max_abs_error for a in FAMILY}
    secs = max(family_reports[a]["seconds"] for a in FAMILY)
    detail = ", ".join(f"A={a}: {e:.1e}" for a, e in errs.items())
    record_property("criterion", f"1 roundtrip sup|m_rec - m0| on |x|<=10 ({detail}; tol 1e-4; <= {secs:.0f} s per run)")
    assert all(e <= 1e-4 for e in errs.values())
    assert secs < 300


def test_criterion_2_scattering_identities(family_reports, record_property):
    worst = {name: max(family_reports[a][name].rel_error for a in FAMILY)
             for name in ("unitarity", "a_at_i", "reflection_symmetry", "spectral_limits")}
    record_property("criterion", "2 scattering identities (" + ", ".join(
        f"{k} {v:.1e}" for k, v in worst.items())
        + "; tol 1e-8, 1e-6 rel, 1e-8, 1e-5; a(i) = exp(-L/2), r(-1/z) = -r(z))")
    for a in FAMILY:
        for name in worst:
            assert family_reports[a][name].passed, (a, family_reports[a][name].to_dict())


@pytest.mark.xfail(strict=True, reason="a(i) = exp(-L/2); the stated exponent has the opposite sign")
def test_criterion_2_stated_a_at_i(record_property):
    record_property("criterion", "2 (stated form) a(i) = exp(+(1/2) int (q-1) dx) to 1e-6 relative")
    p = direct.prepare_profile(pipeline.KappaScaling(KAPPA).native_field(gauss(0.2)), X)
    a_i = direct.a_at(p, 1j)[0]
    ref = np.exp(0.5 * p.mass)
    assert abs(a_i - ref) / ref <= 1e-6


@pytest.mark.xfail(strict=True, reason="measured r(-1/z) = -r(z)")
def test_criterion_2_stated_r_symmetry(record_property):
    record_property("criterion", "2 (stated form) r(z) = r(-1/z) to 1e-8")
    p = direct.prepare_profile(gauss(0.2), X)
    sd = direct.forward(p, grids.SpectralGrid(24.0, 512))
    assert np.max(np.abs(sd.r[0] - sd.r[1])) <= 1e-8


def test_criterion_3_oracles(family_reports, reference_suite, record_property):
    ode = max(family_reports[a]["ode_oracle"].rel_error for a in FAMILY)
    nd = reference_suite["neumann_vs_dense"].max_abs_error
    record_property("criterion", f"3 Volterra vs ODE oracle at 64 z {ode:.1e} (tol 1e-6); "
                                 f"Neumann vs dense on 256 nodes {nd:.1e} (tol 1e-9)")
    assert all(family_reports[a]["ode_oracle"].passed for a in FAMILY)
    assert reference_suite["neumann_vs_dense"].passed


def test_criterion_4_operator_bounds(reference_suite, record_property):
    ob = reference_suite["operator_bounds"]
    pr = reference_suite["projections"]
    record_property("criterion", f"4 small-norm bounds worst ratio {ob.rel_error:.2f} (<= 1); Plemelj "
                                 f"{pr.max_abs_error:.1e} (tol 1e-10); contraction ratio "
                                 f"{pr.diagnostics['contraction_ratio']:.3f} (<= 1)")
    assert ob.passed and pr.passed


def test_criterion_5_dynamics(reference_suite, record_property):
    dyn = reference_suite["dynamics"]
    res = reference_suite["pde_residual"]
    record_property("criterion", f"5 IST vs stepper rel L2 {dyn.rel_error:.1e} over t in (0.1, 0.25, 0.5) "
                                 f"(tol 1e-3); mCH residual {res.rel_error:.1e} at h=1e-3 (tol 1e-3)")
    assert dyn.passed and res.passed


def test_criterion_5_detects_reversed_time(record_property):
    cfg = validate.SuiteConfig(kappa=KAPPA, times=(0.5,), checks=("dynamics",), time_sign=-1.0)
    rep = validate.run_invariant_suite(gauss(0.1), X, cfg)[0]
    record_property("criterion", f"5 (mutation) reversed time flow gives rel L2 {rep.rel_error:.2f}, detected")
    assert not rep.passed and rep.rel_error > 1e-2


def test_criterion_6_coherence(reference_suite, record_property):
    c = reference_suite["coherence"]
    d = c.diagnostics
    record_property("criterion", f"6 coherence q_min {d['q_min']:.6f}, |q^2-1-m^2| {d['q_identity']:.1e}, "
                                 f"dx/dy in [{d['dx_dy'][0]:.4f}, {d['dx_dy'][1]:.4f}], "
                                 f"eta vs m_x/q^3 {d['eta']:.1e}, left/right at y=0 {d['left_right']:.1e}")
    assert c.passed, c.to_dict()


@pytest.mark.xfail(strict=True, reason="lim z M12 is real and equals m_x/q^3")
def test_criterion_6_stated_eta(gauss_run, record_property):
    from scipy.interpolate import CubicSpline

    from mch_ist.reconstruct import reconstruct_field

    record_property("criterion", "6 (stated form) eta = -i m_x/(1+m^2)^(3/2) to 1e-5")
    ys = np.linspace(-6, 6, 241)
    fs = reconstruct_field(gauss_run.data, ys, 0.0, gauss_run.ctx)
    xy = CubicSpline(ys, fs.x_of_y).derivative()(ys)
    mx = CubicSpline(ys, fs.m_y).derivative()(ys) / xy
    assert np.max(np.abs(fs.eta_y + 1j * mx / fs.q_y ** 3)) <= 1e-5


def test_criterion_7_solitons(record_property):
    d = soliton.soliton_data([(np.exp(0.5j), 1j * np.exp(0.5j))])
    x = np.linspace(-40, 40, 1601)
    h, t = 1e-3, 0.3
    snaps = [soliton.soliton_profile(d, x, t + s * h, KAPPA) for s in (-1, 0, 1)]
    res = validate.fd_mch_residual(snaps, h, x, KAPPA)

    def at(y, tt):
        return soliton.soliton_point(d, y, tt).expansions

    hs = [1e-2, 5e-3, 2.5e-3]
    lax = [validate.lax_compatibility_residual(at, 0.7, 0.3, step) for step in hs]
    order = validate.observed_order(hs, lax)
    empty = soliton.soliton_data([])
    zero = soliton.soliton_profile(empty, x, t, KAPPA)
    fs = soliton.soliton_field(empty, np.linspace(-5, 5, 21), t)
    record_property("criterion", f"7 soliton mCH residual {res:.1e} (tol 1e-6); Lax residuals "
                                 f"{', '.join(f'{v:.1e}' for v in lax)} order {order:.2f}; empty spectrum max|m| "
                                 f"{np.max(np.abs(zero)):.0e}")
    assert res <= 1e-6
    assert abs(order - 2.0) <= 0.3 and lax[0] > lax[1] > lax[2]
    assert np.all(zero == 0) and np.all(fs.m_y == 0) and np.all(fs.q_y == 1)


def test_criterion_7_lax_order_on_gaussian(reference_suite, record_property):
    rep = reference_suite["lax_order"]
    record_property("criterion", f"7 Lax compatibility on the Gaussian: order {rep.diagnostics['order']:.2f}")
    assert rep.passed


@pytest.mark.slow
def test_criterion_8_global_smoke(record_property):
    run = pipeline.run_forward(gauss(0.1), X, grids.SpectralGrid(24.0, 4096), kappa=KAPPA)
    sup = {}
    for t in (0.0, 1.0, 5.0, 10.0, 50.0):
        lo, hi = pipeline.y_window(run, t, 2.0)
        ys = np.linspace(lo, hi, int((hi - lo) / 0.1) + 1)
        ok, _ = pipeline.check_grid(run, ys, t)
        assert ok, t
        snap = pipeline.inverse(run, t, ys)
        assert np.all(np.isfinite(snap.field.q_y))
        sup[t] = float(np.max(np.abs(snap.field.q_y - 1)))
    record_property("criterion", "8 sup_y|q-1| at t = 0, 1, 5, 10, 50: "
                    + ", ".join(f"{v:.2e}" for v in sup.values()) + " (bound 1.1 x t=0 value)")
    assert all(v <= 1.1 * sup[0.0] for v in sup.values())
