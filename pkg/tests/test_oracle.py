import math

import numpy as np
import pytest

from plabound.covmodel import build_identity_scenario, sample_wishart_scenario
from plabound.errors import DomainError, SolverPreconditionError, StructuralError
from plabound.oracle import (
    GridSpec,
    brute_force_scalar,
    check_zero_block_inverse,
    conditional_cross_covariance,
    finite_difference_gradient,
    scalar_cost,
    scalar_identity_divergence,
)
from plabound.solver import AttackParameters, cost_J, gradient, solve


def scalar(sigma, rho):
    return build_identity_scenario(1, rho=rho, sigma=sigma, tau=rho * sigma)


def test_scalar_cost_matches_matrix_cost():
    K = scalar(0.8, 0.3)
    for z, c in [(0.1, 0.5), (-0.7, 1.2), (0.45, 0.3)]:
        assert scalar_cost(K, z, c) == pytest.approx(cost_J(K, AttackParameters([[z]], [[c]])), rel=1e-13)


def test_brute_force_rho_zero():
    sigma = 0.9
    K = scalar(sigma, 0.0)
    _, _, j = brute_force_scalar(K, GridSpec((-1, 1), (0, 1), 1e-3))
    assert abs(j - (2 + sigma ** 2 / (1 - sigma ** 2))) <= 1e-3


def test_brute_force_z_equals_x():
    K = build_identity_scenario(1, rho=1.0, sigma=0.6, tau=0.6)
    z, c, j = brute_force_scalar(K, GridSpec((0, 1), (0, 1), 1e-3))
    assert j == pytest.approx(2.0, abs=1e-3)


def test_brute_force_grid_excluding_optimum():
    K = scalar(0.9, 0.4)
    j_star = solve(K).j_star
    _, _, j = brute_force_scalar(K, GridSpec((2, 3), (0, 1), 1e-2))
    assert j > j_star


def test_brute_force_rejects():
    with pytest.raises(DomainError):
        brute_force_scalar(scalar(0.5, 0.5), GridSpec((-100, 100), (0, 100), 1e-3))
    with pytest.raises(StructuralError):
        brute_force_scalar(build_identity_scenario(2, 0.1, 0.2, 0.0))
    with pytest.raises(DomainError):
        GridSpec(step=0)


@pytest.mark.parametrize("sigma,rho", [(0.9, 0.0), (0.9, 0.3), (0.6, 0.5), (0.4, 0.7), (0.95, 0.1)])
def test_analytic_scalar_matches_solver(sigma, rho):
    assert solve(scalar(sigma, rho)).d_star == pytest.approx(scalar_identity_divergence(sigma, rho), abs=1e-9)


def test_analytic_scalar_rho_zero():
    assert scalar_identity_divergence(0.6, 0.0) == pytest.approx(0.36 / 0.64, abs=1e-14)


def test_fd_gradient_matches_analytic():
    K = sample_wishart_scenario(2, 1, "complex")
    rng = np.random.default_rng(0)
    p = AttackParameters(0.3 * rng.standard_normal((2, 2)), np.eye(2) * 2)
    fd = finite_difference_gradient(K, p)
    gZ, gC = gradient(K, p)
    np.testing.assert_allclose(fd.gZ, gZ, atol=1e-6)
    np.testing.assert_allclose(fd.gC, gC, atol=1e-6)


def test_fd_gradient_small_at_solution():
    K = sample_wishart_scenario(3, 2, "real")
    sol = solve(K)
    assert finite_difference_gradient(K, sol.params).relative_norm <= 1e-5


def test_fd_gradient_nonzero_generic():
    K = build_identity_scenario(2, 0.5, 0.6, 0.3)
    fd = finite_difference_gradient(K, AttackParameters(np.zeros((2, 2)), np.eye(2)))
    assert fd.norm > 1e-2


def test_fd_second_order():
    K = scalar(0.7, 0.4)
    p = AttackParameters([[0.3]], [[0.8]])
    exact = gradient(K, p)[0][0, 0].real
    e1 = abs(finite_difference_gradient(K, p, h=1e-2).gZ[0, 0].real - exact)
    e2 = abs(finite_difference_gradient(K, p, h=5e-3).gZ[0, 0].real - exact)
    assert 3.0 < e1 / e2 < 5.0


def test_fd_nonfinite_probe_names_coordinate():
    # z = x: det K_xv = c^2, so the minus probe at c = h is singular
    K = build_identity_scenario(1, rho=1.0, sigma=0.5, tau=0.5)
    with pytest.raises(SolverPreconditionError, match=r"Re C\[0, 0\]"):
        finite_difference_gradient(K, AttackParameters([[0.5]], [[1e-6]]), h=1e-6)


def test_zero_block_checks():
    assert check_zero_block_inverse(np.diag([1.0, 2.0, 3.0, 4.0, 5.0]), 2, 1) == 0
    rng = np.random.default_rng(3)
    A = rng.standard_normal((5, 5))
    M = A @ A.T + np.eye(5)
    assert check_zero_block_inverse(M, 2, 1) > 1e-2
    assert conditional_cross_covariance(M, 2, 1) > 1e-2
    with pytest.raises(SolverPreconditionError):
        check_zero_block_inverse(np.diag([1.0, 0.0, 1.0]), 1, 1)
    with pytest.raises(StructuralError):
        check_zero_block_inverse(np.eye(4), 1, 1)


def test_analytic_domain():
    with pytest.raises(DomainError):
        scalar_identity_divergence(1.0, 0.2)
    assert math.isfinite(scalar_identity_divergence(0.99, 0.0))
