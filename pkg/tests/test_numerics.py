import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afrelay.errors import BracketError, DomainError
from afrelay.numerics import (MuStationarySolver, RootConfig, bisect,
                              bisect_decreasing_batch, expect_exponential,
                              solve_stationary_mu)

coeff = st.floats(min_value=1e-2, max_value=1e4,
                  allow_nan=False, allow_infinity=False)


def test_bisect_linear():
    assert bisect(lambda x: x - 2.0, 0.0, 10.0) == pytest.approx(2.0, abs=1e-12)


def test_bisect_sqrt2():
    assert bisect(lambda x: x * x - 2.0, 0.0, 2.0) == pytest.approx(
        np.sqrt(2.0), abs=1e-10)


def test_bisect_requires_bracket():
    with pytest.raises(BracketError):
        bisect(lambda x: x + 1.0, 0.0, 1.0)


def test_bisect_rejects_bad_config():
    with pytest.raises(DomainError):
        RootConfig(abs_tol=0.0)


def test_batch_bisect_vector_roots():
    targets = np.array([1.0, 4.0, 9.0])
    roots = bisect_decreasing_batch(lambda x: targets - x * x,
                                    np.full(3, 1e-6), np.full(3, 1e6))
    assert np.allclose(roots, [1.0, 2.0, 3.0], rtol=1e-10)


def test_batch_bisect_rejects_bad_bracket():
    with pytest.raises(BracketError):
        bisect_decreasing_batch(lambda x: -np.ones_like(x),
                                np.array([1e-3]), np.array([1e3]))


def test_expectation_identity_mean():
    assert expect_exponential(lambda x: x, 81.0).value == pytest.approx(
        81.0, rel=1e-10)


def test_expectation_inverse_sqrt():
    got = expect_exponential(lambda x: 1.0 / np.sqrt(x), 1.0).value
    assert got == pytest.approx(np.sqrt(np.pi), rel=1e-10)


def test_expectation_indicator_cdf():
    got = expect_exponential(lambda x: (x < 1.0).astype(float), 1.0).value
    assert got == pytest.approx(1.0 - np.exp(-1.0), rel=1e-10)


def test_expectation_mc_matches_quadrature():
    g = lambda x: np.log1p(x)
    quad = expect_exponential(g, 5.0).value
    mc = expect_exponential(g, 5.0, method="monte_carlo", samples=200_000,
                            seed=3)
    assert abs(mc.value - quad) < 3.0 * mc.stderr


def test_expectation_rejects_bad_mean():
    with pytest.raises(DomainError):
        expect_exponential(lambda x: x, 0.0)


def test_stationary_mu_single_hop_is_waterfilling():
    for a, lam in [(0.5, 0.9), (2.0, 0.1), (10.0, 0.3)]:
        got = solve_stationary_mu([a], lam, mu_max=50.0)
        assert got == pytest.approx(max(0.0, 1.0 / lam - a), abs=1e-9)


def test_stationary_mu_zero_above_peak():
    assert solve_stationary_mu([2.0, 3.0], 1e6) == 0.0


def test_stationary_mu_against_dense_grid():
    a = np.array([6.0, 8.0])
    lam, mu_max = 0.05, 50.0
    got = solve_stationary_mu(a, lam, mu_max=mu_max)

    def h(mu):
        d = a[0] * mu + a[1]
        return np.log1p(mu ** 2 / d) - lam * mu

    grid = np.linspace(0.0, mu_max, 1_000_001)
    coarse = grid[np.argmax(h(grid))]
    fine = np.linspace(max(coarse - 1e-4, 0.0), coarse + 1e-4, 200_001)
    best = fine[np.argmax(h(fine))]
    assert got == pytest.approx(best, abs=1e-6)
    assert h(got) >= h(best) - 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=4),
       st.floats(min_value=1e-4, max_value=1.0))
def test_stationary_mu_monotone_in_price(coeffs, lam):
    low = solve_stationary_mu(coeffs, lam, mu_max=10.0)
    high = solve_stationary_mu(coeffs, 2.0 * lam, mu_max=10.0)
    assert low >= high - 1e-9


@settings(max_examples=50, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=4),
       st.floats(min_value=1e-4, max_value=10.0))
def test_stationary_mu_beats_random_probes(coeffs, lam):
    mu_max = 5.0
    got = solve_stationary_mu(coeffs, lam, mu_max=mu_max)
    a = np.asarray(coeffs)
    powers = np.arange(len(a) - 1, -1, -1.0)

    def h(mu):
        d = np.sum(a * np.where(powers > 0, mu ** powers, 1.0))
        return np.log1p(mu ** len(a) / d) - lam * mu

    probes = np.random.default_rng(0).uniform(0.0, mu_max, 1000)
    assert h(got) >= max(h(x) for x in probes) - 1e-8


def test_stationary_solver_handles_dead_rows():
    coeffs = np.array([[1.0, np.inf], [1.0, 2.0]])
    solver = MuStationarySolver(coeffs, mu_max=10.0)
    out = solver.solve(np.asarray(0.01))
    assert out[0] == 0.0 and out[1] > 0.0


def test_stationary_mu_rejects_bad_inputs():
    with pytest.raises(DomainError):
        solve_stationary_mu([1.0], 0.0)
    with pytest.raises(DomainError):
        solve_stationary_mu([-1.0], 0.1)
    with pytest.raises(DomainError):
        MuStationarySolver(np.ones((2, 2)), mu_max=0.0)
