import numpy as np
import pytest

from mch_ist import soliton, validate
from mch_ist.errors import DomainError, GridMismatchError, StepperError

XF = np.linspace(-40.0, 40.0, 1024, endpoint=False)


def test_stepper_matches_linear_flow():
    m0 = 1e-6 * np.exp(-XF ** 2)
    run = validate.fd_mch_evolve(m0, XF, (0.0, 1.0), 1.0, 2e-3)
    xi = 2 * np.pi * np.fft.fftfreq(len(XF), XF[1] - XF[0])
    exact = np.fft.ifft(np.fft.fft(m0) * np.exp(-1j * xi / (1 + xi * xi))).real
    assert np.linalg.norm(run.snapshots[-1] - exact) / np.linalg.norm(exact) < 1e-10


def test_rescaled_density_is_conserved():
    run = validate.fd_mch_evolve(0.1 * np.exp(-XF ** 2), XF, (0.0, 0.5, 1.0), 1.0, 2e-3)
    assert run.invariant_drift < 1e-12
    h = XF[1] - XF[0]
    native_form = [np.sum(np.sqrt(1 + m * m) - 1) * h for m in run.snapshots]
    assert np.ptp(native_form) > 1e-7  # only conserved at kappa = 2


def test_native_density_is_conserved_at_kappa_two():
    run = validate.fd_mch_evolve(0.1 * np.exp(-XF ** 2), XF, (0.0, 1.0), 2.0, 2e-3)
    h = XF[1] - XF[0]
    vals = [np.sum(np.sqrt(1 + m * m) - 1) * h for m in run.snapshots]
    assert abs(vals[1] - vals[0]) < 1e-12


def test_stepper_guards():
    with pytest.raises(StepperError):
        validate.fd_mch_step(np.exp(-XF ** 2), 1.0, XF[1] - XF[0])
    with pytest.raises(StepperError):
        validate.fd_mch_evolve(0.1 * np.exp(-XF ** 2), XF, (0.5, 0.2))
    x = np.linspace(-6, 6, 256, endpoint=False)
    with pytest.raises(StepperError):
        validate.fd_mch_evolve(0.1 * np.exp(-x ** 2), x, (0.0, 3.0), 1.0, 2e-3)


def test_residual_of_stepper_solution():
    m0 = 0.1 * np.exp(-XF ** 2)
    snaps = validate.fd_mch_evolve(m0, XF, (0.299, 0.3, 0.301), 1.0, 1e-3).snapshots
    assert validate.fd_mch_residual(snaps, 1e-3, XF, 1.0) < 1e-6
    # the same data is not a solution at the other dispersion coefficient
    assert validate.fd_mch_residual(snaps, 1e-3, XF, 2.0) > 1e-2


def test_residual_guards():
    z = np.zeros_like(XF)
    assert validate.fd_mch_residual([z, z, z], 1e-3, XF) == 0.0
    with pytest.raises(GridMismatchError):
        validate.fd_mch_residual([z, z], 1e-3, XF)
    with pytest.raises(GridMismatchError):
        validate.fd_mch_residual([z, z, z[:-1]], 1e-3, XF)


def test_oracle_rejects_complex_points():
    x = np.linspace(-12, 12, 2401)
    with pytest.raises(DomainError):
        validate.ode_oracle_scattering(0.1 * np.exp(-x * x), x, np.array([1 + 1j]))


def test_oracle_on_zero_profile():
    x = np.linspace(-12, 12, 2401)
    a, b = validate.ode_oracle_scattering(np.zeros_like(x), x, np.array([0.5, 2.0]))
    assert np.allclose(a, 1) and np.allclose(b, 0)


def test_observed_order():
    hs = np.array([0.1, 0.05, 0.025])
    assert validate.observed_order(hs, 3 * hs ** 2) == pytest.approx(2.0)


def test_lax_pair_is_compatible_on_a_soliton():
    d = soliton.soliton_data([(np.exp(0.5j), 1j * np.exp(0.5j))])

    def at(y, t):
        return soliton.soliton_point(d, y, t).expansions

    hs = [1e-2, 5e-3, 2.5e-3]
    res = [validate.lax_compatibility_residual(at, 0.7, 0.3, h) for h in hs]
    assert abs(validate.observed_order(hs, res) - 2.0) < 0.1
    with pytest.raises(DomainError):
        validate.lax_compatibility_residual(at, 0.7, 0.3, 1e-2, z=1j)


def test_lax_pair_fails_for_reversed_time():
    d = soliton.soliton_data([(np.exp(0.5j), 1j * np.exp(0.5j))])

    def at(y, t):
        return soliton.soliton_point(d, y, t, time_sign=-1.0).expansions

    res = [validate.lax_compatibility_residual(at, 0.7, 0.3, h) for h in (1e-2, 5e-3)]
    assert min(res) > 1e-2


def test_suite_reports_failures_instead_of_raising():
    x = np.linspace(-12, 12, 2401)
    cfg = validate.SuiteConfig(n_k=512, checks=("unitarity", "no_such_check"))
    reps = validate.run_invariant_suite(0.1 * np.exp(-x * x), x, cfg)
    assert reps[0].passed
    assert not reps[1].passed and "error" in reps[1].diagnostics
    assert set(reps[0].to_dict()) >= {"name", "max_abs_error", "rel_error", "tolerance", "passed"}


def test_suite_detects_reversed_time():
    x = np.linspace(-12, 12, 2401)
    m0 = 0.1 * np.exp(-x * x)
    good = validate.run_invariant_suite(m0, x, validate.SuiteConfig(checks=("time_flow",)))
    bad = validate.run_invariant_suite(m0, x, validate.SuiteConfig(checks=("time_flow",), time_sign=-1.0))
    assert good[0].passed and not bad[0].passed
