import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plabound.errors import DomainError, SolverPreconditionError
from plabound.gaussian_info import (
    ErrorRegionBound,
    beta_lower_bound,
    binary_divergence,
    kl_gaussian,
    region_boundary,
)


def random_pd(rng, d, complex_=True):
    A = rng.standard_normal((d, d)) + (1j * rng.standard_normal((d, d)) if complex_ else 0)
    return A @ A.conj().T + 0.1 * np.eye(d)


def test_kl_equal_is_zero():
    K = random_pd(np.random.default_rng(0), 4)
    assert kl_gaussian(K, K) == pytest.approx(0, abs=1e-12)


def test_kl_scalar():
    assert kl_gaussian([[2.0]], [[1.0]]) == pytest.approx(2 - math.log(2) - 1, rel=1e-14)
    assert kl_gaussian([[2.0]], [[1.0]]) == pytest.approx(0.30685281944005466, rel=1e-13)


@pytest.mark.parametrize("c", [0.2, 1.0, 3.7])
def test_kl_scaled(c):
    # eigenvalues of K1^-1 K0 are all c
    K1 = random_pd(np.random.default_rng(1), 3)
    assert kl_gaussian(c * K1, K1) == pytest.approx(3 * (c - math.log(c) - 1), abs=1e-12)


def test_kl_singular_cases():
    assert kl_gaussian(np.diag([1.0, 0.0]), np.eye(2)) == math.inf
    with pytest.raises(SolverPreconditionError):
        kl_gaussian(np.eye(2), np.diag([1.0, 0.0]))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), d=st.integers(1, 5))
def test_kl_nonnegative(seed, d):
    rng = np.random.default_rng(seed)
    K0, K1 = random_pd(rng, d), random_pd(rng, d)
    assert kl_gaussian(K0, K1) >= 0
    assert kl_gaussian(K0, K0) == pytest.approx(0, abs=1e-10)


def test_binary_divergence_values():
    assert binary_divergence(0.3, 0.7) == 0
    assert binary_divergence(0.0, 0.5) == pytest.approx(math.log(2), rel=1e-15)
    expected = 0.2 * math.log(0.2 / 0.9) + 0.8 * math.log(0.8 / 0.1)
    assert binary_divergence(0.2, 0.1) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(1.362738, abs=5e-7)


def test_binary_divergence_edges():
    assert binary_divergence(0.5, 0.0) == math.inf
    assert binary_divergence(0.0, 1.0) == 0
    assert binary_divergence(1.0, 0.0) == 0
    with pytest.raises(DomainError):
        binary_divergence(1.2, 0.5)
    with pytest.raises(DomainError):
        binary_divergence(0.5, -0.1)


@pytest.mark.parametrize("psi", np.linspace(0, 1, 21))
def test_binary_divergence_zero_on_diagonal(psi):
    assert binary_divergence(1 - psi, psi) == 0


def test_beta_lower_bound_trivial_cases():
    assert beta_lower_bound(0.3, 0.0) == 0.7
    assert beta_lower_bound(0.5, math.log(2)) == 0.0


def test_beta_lower_bound_matches_grid_scan():
    alpha, d = 0.1, 0.05
    beta = beta_lower_bound(alpha, d)
    grid = np.linspace(0, 1 - alpha, 200001)
    f = np.array([binary_divergence(b, alpha) for b in grid])
    scan = grid[np.argmax(f <= d)]
    assert abs(beta - scan) <= grid[1] - grid[0]
    assert abs(binary_divergence(beta, alpha) - d) <= 1e-12


def test_region_boundary_zero_divergence():
    b = region_boundary(0.0, [0.1, 0.2])
    assert b.points == ((0.1, 0.9), (0.2, 0.8))


def test_region_boundary_monotone_in_divergence():
    grid = np.linspace(0.01, 0.99, 50)
    lo, hi = region_boundary(0.2, grid), region_boundary(1.5, grid)
    assert np.all(hi.beta_low <= lo.beta_low)


def test_region_boundary_invariants():
    d = 0.8
    b = region_boundary(d, np.linspace(0.01, 0.99, 99))
    assert np.all(np.diff(b.beta_low) <= 0)
    for a, beta in b.points:
        assert beta <= 1 - a
        if beta > 0:
            assert abs(binary_divergence(beta, a) - d) <= 1e-12


def test_region_boundary_rejects_unsorted_grid():
    with pytest.raises(DomainError):
        region_boundary(0.1, [0.2, 0.1])


def test_region_csv_roundtrip():
    b = region_boundary(0.37, np.linspace(0.01, 0.99, 7))
    text = b.to_csv()
    assert text.splitlines()[0] == "alpha,beta_low"
    assert ErrorRegionBound.from_csv(text, 0.37) == b


@settings(max_examples=60, deadline=None)
@given(a1=st.floats(0.0, 0.98), a2=st.floats(0.0, 0.98), d1=st.floats(0, 5), d2=st.floats(0, 5))
def test_beta_lower_bound_monotone(a1, a2, d1, d2):
    (a1, a2), (d1, d2) = sorted((a1, a2)), sorted((d1, d2))
    assert beta_lower_bound(a2, d1) <= beta_lower_bound(a1, d1)
    assert beta_lower_bound(a1, d2) <= beta_lower_bound(a1, d1)
    assert binary_divergence(beta_lower_bound(a1, d1), a1) <= d1 + 1e-12
