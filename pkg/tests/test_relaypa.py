import numpy as np
import pytest

from afrelay.calib import CalibratedMultipliers
from afrelay.channel import (STREAM_TRAIN, STREAM_VALIDATE, LinkBudget,
                             build_link_budget, sample_trials)
from afrelay.config import SystemConfig
from afrelay.errors import DomainError, UsageError
from afrelay.relaypa import (beta_stationary, calibrate_beta_exact,
                             solve_beta_asy, solve_beta_exact)


def test_stpc_symmetric_column():
    # mu*gamma = [2, 2] -> beta = [0.5, 0.5]; implied multiplier 1 satisfies
    # the stationarity relation beta*(mu*gamma*beta + 1) = 1/lambda
    beta = solve_beta_exact("STPC", np.array([[2.0], [2.0]]), np.array([1.0]))
    assert np.allclose(beta, 0.5, atol=1e-10)
    assert beta_stationary(2.0, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_stpc_matches_grid_minimizer():
    gamma = np.array([[4.0], [1.0]])
    beta = solve_beta_exact("STPC", gamma, np.array([1.0]))[:, 0]
    b0 = np.linspace(1e-6, 1.0 - 1e-6, 100_001)
    obj = np.log1p(1.0 / (4.0 * b0)) + np.log1p(1.0 / (1.0 - b0))
    best = b0[np.argmin(obj)]
    assert beta[0] == pytest.approx(best, abs=1e-4)
    assert beta.sum() == pytest.approx(1.0, abs=1e-10)


def test_stpc_sums_and_positivity_on_random_batch():
    budget = build_link_budget(SystemConfig(hops=3, subcarriers=5))
    gammas = sample_trials(budget, 2, STREAM_VALIDATE, 1, 300)
    mus = np.random.default_rng(0).dirichlet(np.ones(5), 300)
    beta = solve_beta_exact("STPC", gammas, mus)
    assert np.abs(beta.sum(axis=-2) - 1.0).max() < 1e-8
    assert np.all(beta > 0)


def test_zero_mu_gets_inert_placeholder():
    gamma = np.array([[3.0, 3.0], [2.0, 2.0]])
    beta = solve_beta_exact("STPC", gamma, np.array([1.0, 0.0]))
    assert np.allclose(beta[:, 1], 0.5)


def test_ltipc_equal_budget_calibration():
    # all average SNRs equal -> identical multipliers across nodes, and the
    # fresh-draw mean of beta hits 1/N within MC tolerance
    budget = LinkBudget(np.full((2, 2), 25.0))
    mu = np.full(2, 0.5)
    mults = calibrate_beta_exact("LTIPC", budget=budget, mu=mu)
    assert np.allclose(mults.values[0], mults.values[1], rtol=1e-8)

    gammas = sample_trials(budget, 17, STREAM_VALIDATE, 0, 100_000)
    beta = solve_beta_exact("LTIPC", gammas, np.full((100_000, 2), 0.5), mults)
    se = beta.std(axis=0) / np.sqrt(len(beta))
    assert np.all(np.abs(beta.mean(axis=0) - 0.5) < 3.0 * se)


def test_lttpc_calibration_total_expectation():
    budget = build_link_budget(SystemConfig(hops=2, subcarriers=2))
    mu = np.full(2, 0.5)
    mults = calibrate_beta_exact("LTTPC", budget=budget, mu=mu)
    gammas = sample_trials(budget, 19, STREAM_VALIDATE, 0, 100_000)
    beta = solve_beta_exact("LTTPC", gammas, np.full((100_000, 2), 0.5), mults)
    assert np.abs(beta.sum(axis=1).mean(axis=0) - 1.0).max() < 0.01


def test_mc_calibration_is_exact_on_training_set():
    budget = build_link_budget(SystemConfig(hops=2, subcarriers=3))
    gammas = sample_trials(budget, 23, STREAM_TRAIN, 0, 2000)
    mus = np.random.default_rng(1).dirichlet(np.ones(3), 2000)
    mults = calibrate_beta_exact("LTIPC", training_gammas=gammas,
                                 training_mus=mus)
    beta = solve_beta_exact("LTIPC", gammas, mus, mults)
    assert np.abs(beta.mean(axis=0) - 0.5).max() < 1e-10


def test_asy_ltipc_closed_form_value():
    # gamma at its mean, N=2 -> beta = 1/(2 sqrt(pi))
    budget = LinkBudget(np.full((2, 1), 7.0))
    beta = solve_beta_asy("LTIPC", np.full((2, 1), 7.0), budget)
    assert np.allclose(beta, 1.0 / (2.0 * np.sqrt(np.pi)), rtol=1e-12)


def test_asy_stpc_ratio_and_exact_sum():
    beta = solve_beta_asy("STPC", np.array([[4.0], [1.0]]))
    assert np.allclose(beta[:, 0], [1.0 / 3.0, 2.0 / 3.0], rtol=1e-12)
    gammas = np.random.default_rng(6).exponential(9.0, (40, 3, 5))
    sums = solve_beta_asy("STPC", gammas).sum(axis=-2)
    assert np.abs(sums - 1.0).max() < 1e-12


def test_asy_ltipc_mean_is_one_over_n():
    # E[beta] = sqrt(Gamma/pi)/N * E[gamma^(-1/2)] = 1/N via the Gamma identity
    budget = LinkBudget(np.full((2, 1), 1.0))
    gammas = sample_trials(budget, 29, STREAM_VALIDATE, 2, 400_000)
    beta = solve_beta_asy("LTIPC", gammas, budget)
    assert np.abs(beta.mean(axis=0) - 0.5).max() < 0.01


def test_asy_lttpc_total_mean_is_one():
    budget = build_link_budget(SystemConfig(hops=3, subcarriers=2))
    gammas = sample_trials(budget, 31, STREAM_VALIDATE, 3, 400_000)
    beta = solve_beta_asy("LTTPC", gammas, budget)
    assert np.abs(beta.sum(axis=1).mean(axis=0) - 1.0).max() < 0.01


def test_appendix_convexity_along_each_node():
    # numerical second derivative of sum_k ln(1+1/(beta_k mu gamma_k))
    # along each beta_k is positive, matching (1+2c)/(beta(beta c+1))^2 > 0
    rng = np.random.default_rng(12)
    for _ in range(200):
        c = rng.exponential(5.0)  # mu * gamma for the probed node
        b = rng.uniform(0.05, 0.95)
        h = 1e-4
        f = lambda x: np.log1p(1.0 / (x * c))
        second = (f(b + h) - 2.0 * f(b) + f(b - h)) / h ** 2
        assert second > 0


def test_multiplier_kind_mismatch_rejected():
    gamma = np.ones((2, 2))
    wrong = CalibratedMultipliers("global", np.asarray(1.0), "LTTPC")
    with pytest.raises(UsageError):
        solve_beta_exact("LTIPC", gamma, np.full(2, 0.5), wrong)
    with pytest.raises(UsageError):
        solve_beta_exact("LTIPC", gamma, np.full(2, 0.5), None)


def test_rejects_nonpositive_gamma():
    with pytest.raises(DomainError):
        solve_beta_exact("STPC", np.array([[1.0], [0.0]]), np.array([1.0]))
    with pytest.raises(DomainError):
        solve_beta_asy("STPC", np.array([[1.0], [-1.0]]))
