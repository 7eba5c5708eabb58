import numpy as np
import pytest

from mch_ist import direct, grids, rhp
from mch_ist.errors import DomainError
from mch_ist.timeflow import PhaseSpec

X = np.linspace(-12.0, 12.0, 2401)
S3 = np.diag([1.0, -1.0])


@pytest.fixture(scope="module")
def sd():
    p = direct.prepare_profile(0.3 * np.exp(-X * X), X)
    return direct.forward(p, grids.SpectralGrid(24.0, 1024))


@pytest.fixture(scope="module")
def sd_small():
    p = direct.prepare_profile(0.3 * np.exp(-X * X), X)
    return direct.forward(p, grids.SpectralGrid(12.0, 256))


@pytest.fixture(scope="module")
def sol(sd):
    return rhp.solve_mu(rhp.build_jump(sd, PhaseSpec(0.7, 0.2), "left"))


def test_zero_reflection_gives_identity(sd):
    jump = rhp.build_jump(sd, PhaseSpec(0.5), "left", reflection=np.zeros_like(sd.r))
    s = rhp.solve_mu(jump)
    assert s.method == "trivial"
    exp = rhp.eval_expansions(s)
    for M in (exp.M0, exp.Mi, exp.Mmi):
        assert np.array_equal(M, np.eye(2))
    assert np.all(exp.Minf1 == 0)


def test_side_guards(sd):
    with pytest.raises(DomainError):
        rhp.build_jump(sd, PhaseSpec(-0.5), "left")
    with pytest.raises(DomainError):
        rhp.build_jump(sd, PhaseSpec(0.5), "right")
    with pytest.raises(ValueError):
        rhp.build_jump(sd, PhaseSpec(0.5), "middle")


@pytest.mark.parametrize("y,side", [(0.5, "left"), (-0.5, "right"), (3.0, "left")])
def test_neumann_matches_dense(sd_small, y, side):
    jump = rhp.build_jump(sd_small, PhaseSpec(y, 0.1), side)
    a = rhp.solve_mu(jump, "neumann")
    b = rhp.solve_mu(jump, "dense")
    assert a.iterations > 0
    assert np.max(np.abs(a.mu - b.mu)) < 1e-9


def test_residual_is_small(sol):
    assert sol.residual < 1e-10
    assert sol.method == "neumann"


def test_small_norm_bounds(sol):
    n = sol.norms
    assert n["mu_minus_I"] <= 2 * n["r_l2"]
    bound = (2 * n["r_linf"] + 1) * n["r_l2"]
    assert n["Mplus_minus_I"] <= bound and n["Mminus_minus_I"] <= bound


def test_determinant_and_symmetries(sol):
    z = np.array([0.7 + 0.9j, -0.3 + 1.7j, 1.2 + 0.4j])
    M = rhp.eval_M(sol, z)
    assert np.allclose(np.linalg.det(M.transpose(2, 0, 1)), 1.0, atol=1e-7)
    M0 = rhp.eval_expansions(sol).M0
    Mw = rhp.eval_M(sol, -1 / z)
    for i in range(len(z)):
        assert np.allclose(Mw[:, :, i], M0 @ S3 @ M[:, :, i] @ S3, atol=1e-7)
    Mr = rhp.eval_M(sol, -np.conj(z))
    for i in range(len(z)):
        assert np.allclose(Mr[:, :, i], S3 @ np.conj(M[:, :, i]) @ S3, atol=1e-7)


def test_expansions_match_direct_evaluation(sol):
    exp = rhp.eval_expansions(sol)
    assert np.allclose(rhp.eval_M(sol, 1j)[:, :, 0], exp.Mi, atol=1e-10)
    assert np.allclose(rhp.eval_M(sol, -1j)[:, :, 0], exp.Mmi, atol=1e-10)
    h = 1e-4
    dM = (rhp.eval_M(sol, 1j + h) - rhp.eval_M(sol, 1j - h))[:, :, 0] / (2 * h)
    assert np.allclose(dM, exp.Mi1, atol=1e-7)
    z = 1e-5j
    assert np.allclose(rhp.eval_M(sol, z)[:, :, 0], exp.M0, atol=1e-4)
    big = 1e4j
    assert np.allclose(big * (rhp.eval_M(sol, big)[:, :, 0] - np.eye(2)), exp.Minf1, atol=1e-4)
    assert abs(np.linalg.det(exp.M0) - 1) < 1e-8


def test_eval_M_guard(sol):
    with pytest.raises(DomainError):
        rhp.eval_M(sol, np.array([0.5 + 0j]))


def test_mu_y_matches_finite_difference(sd):
    y, h = 0.7, 1e-4
    s = rhp.solve_mu(rhp.build_jump(sd, PhaseSpec(y), "left"))
    lo = rhp.solve_mu(rhp.build_jump(sd, PhaseSpec(y - h), "left")).mu
    hi = rhp.solve_mu(rhp.build_jump(sd, PhaseSpec(y + h), "left")).mu
    assert np.max(np.abs(rhp.solve_mu_y(s) - (hi - lo) / (2 * h))) < 1e-6


def test_operator_norm_estimate(sd_small):
    jump = rhp.build_jump(sd_small, PhaseSpec(0.5), "left")
    est = rhp.operator_norm_estimate(jump, iters=60)
    K = np.eye(4 * jump.grid.n) - rhp.collocation_matrix(jump)
    exact = np.linalg.norm(K, 2)
    assert est == pytest.approx(exact, rel=1e-3)
    assert est < 1.0
