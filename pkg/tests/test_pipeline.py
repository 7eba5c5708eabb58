import numpy as np
import pytest

from mch_ist import grids, pipeline


def test_y_window_grows_with_time(gauss_run):
    lo0, hi0 = pipeline.y_window(gauss_run, 0.0)
    lo1, hi1 = pipeline.y_window(gauss_run, 2.0)
    tau = 1.0  # kappa = 1 halves time
    assert lo0 - lo1 == pytest.approx(0.25 * tau)
    assert hi1 - hi0 == pytest.approx(2.0 * tau)


def test_check_grid(gauss_run):
    ok, need = pipeline.check_grid(gauss_run, np.linspace(-15, 15, 11), 0.5)
    assert ok and need > gauss_run.data.grid.dk
    ok, _ = pipeline.check_grid(gauss_run, np.linspace(-80, 80, 11), 10.0)
    assert not ok


def test_evolve_requires_ascending_times(gauss_run):
    with pytest.raises(ValueError):
        pipeline.evolve(gauss_run, [0.5, 0.1], np.linspace(-1, 1, 5))


def test_inverse_in_y_frame_is_physical(gauss_run):
    snap = pipeline.inverse(gauss_run, 0.0, np.array([-0.5, 0.0, 0.5]))
    native = snap.field.m_y
    assert np.allclose(snap.m, np.sqrt(0.5) * native)
    assert np.allclose(snap.q, np.sqrt(1 + snap.m ** 2))


def test_kappa_two_runs_on_the_native_flow(x_nodes):
    m0 = 0.1 * np.exp(-x_nodes ** 2)
    run = pipeline.run_forward(m0, x_nodes, grids.SpectralGrid(24.0, 512), kappa=2.0)
    assert run.kappa == 2.0 and run.scaling.s == 1.0
    assert np.array_equal(run.profile.m0, m0)


def test_workers_do_not_change_the_field(gauss_run):
    ys = np.linspace(-2, 2, 9)
    a = pipeline.inverse(gauss_run, 0.3, ys)
    b = pipeline.inverse(gauss_run, 0.3, ys, workers=3)
    assert np.array_equal(a.m, b.m)
