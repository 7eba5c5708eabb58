import numpy as np
import pytest

from mch_ist import timeflow
from mch_ist.errors import DomainError


def test_theta_in_z_and_k_agree():
    z = np.array([0.3, 0.8, 1.7, -2.5, -0.4])
    k = z - 1 / z
    for y, t in [(0.0, 0.0), (1.3, 0.0), (-2.0, 0.7)]:
        assert np.allclose(timeflow.theta(z, y, t), timeflow.theta_k(k, y, t), atol=1e-14)


def test_time_rate_forms_agree():
    z = np.array([0.3 + 0.2j, 1.7, -2.5 + 1j])
    k = z - 1 / z
    assert np.allclose(timeflow.time_rate(z), 2 * k / (k * k + 4))


def test_theta_is_real_on_real_line_and_odd_in_k():
    k = np.linspace(-5, 5, 11)
    th = timeflow.theta_k(k, 1.2, 0.4)
    assert np.allclose(th, -th[::-1])


def test_theta_guards():
    with pytest.raises(DomainError):
        timeflow.theta(np.array([0.0]), 1.0)
    with pytest.raises(DomainError):
        timeflow.theta(np.array([1j]), 1.0, 0.5)
    with pytest.raises(DomainError):
        timeflow.PhaseSpec(0.0, -1.0)
    timeflow.theta(np.array([1j]), 1.0, 0.0)  # the time term is absent at t = 0


def test_evolved_b_is_a_phase():
    class Grid:
        k_nodes = np.linspace(-3, 3, 7)

    class Data:
        grid = Grid()
        b = np.ones((2, 7), dtype=complex)
        r = np.ones((2, 7), dtype=complex)

    ev = timeflow.evolve_scattering(Data(), 0.8)
    assert np.allclose(np.abs(ev.b_at()), 1.0)
    k = Grid.k_nodes
    assert np.allclose(ev.b_at()[0], np.exp(-4j * k * 0.8 / (k * k + 4)))
    with pytest.raises(DomainError):
        timeflow.evolve_scattering(Data(), -0.1)


def test_kappa_scaling_roundtrip():
    s = timeflow.KappaScaling(1.0)
    assert s.s ** 2 == pytest.approx(0.5)
    m = np.array([0.1, -0.2])
    assert np.allclose(s.physical_field(s.native_field(m)), m)
    assert s.native_time(2.0) == pytest.approx(1.0)
    assert timeflow.KappaScaling(2.0).s == 1.0
    with pytest.raises(DomainError):
        timeflow.KappaScaling(0.0)
