import numpy as np
import pytest
from scipy import stats

from afrelay.channel import (LinkBudget, build_link_budget, hop_snr_factors,
                             make_stream, sample_batch, sample_realization,
                             unbalanced_hop_distances)
from afrelay.config import SystemConfig
from afrelay.errors import ConfigError, DomainError, ShapeError


def test_unbalanced_budget_two_hops():
    cfg = SystemConfig(hops=2, subcarriers=3, topology="unbalanced",
                       pathloss_exponent=4.0)
    budget = build_link_budget(cfg, gamma0=1.0)
    assert np.allclose(budget.gamma_avg[0], 1296.0)
    assert np.allclose(budget.gamma_avg[1], 81.0)


def test_balanced_budget_two_hops():
    cfg = SystemConfig(hops=2, subcarriers=2, topology="balanced")
    budget = build_link_budget(cfg, gamma0=1.0)
    assert np.allclose(budget.gamma_avg, 81.0)


@pytest.mark.parametrize("delta", [2.0, 3.0, 4.0])
def test_single_hop_balanced_budget(delta):
    cfg = SystemConfig(hops=1, subcarriers=1, topology="balanced",
                       pathloss_exponent=delta)
    budget = build_link_budget(cfg, gamma0=2.5)
    assert np.allclose(budget.gamma_avg, 2.0 ** delta * 2.5)


def test_budget_identical_across_subcarriers():
    cfg = SystemConfig(hops=3, subcarriers=8)
    budget = build_link_budget(cfg, gamma0=4.0)
    assert np.all(budget.gamma_avg == budget.gamma_avg[:, :1])


def test_unbalanced_hops_strictly_decreasing():
    factors = hop_snr_factors(5, 4.0)
    assert np.all(np.diff(factors) < 0)


def test_distances_sum_to_total():
    for n in range(1, 7):
        assert np.isclose(unbalanced_hop_distances(n, 3.0).sum(), 3.0)


def test_nonpositive_gamma0_rejected():
    cfg = SystemConfig(hops=2, subcarriers=2)
    with pytest.raises(ConfigError):
        build_link_budget(cfg, gamma0=0.0)
    with pytest.raises(ConfigError):
        build_link_budget(cfg, gamma0=-3.0)


def test_explicit_budget_shape_and_positivity():
    cfg = SystemConfig(hops=2, subcarriers=2, topology="explicit",
                       explicit_gamma=((1.0, 2.0), (3.0, 4.0)))
    budget = build_link_budget(cfg)
    assert budget.gamma_avg.shape == (2, 2)
    with pytest.raises(ConfigError):
        SystemConfig(hops=2, subcarriers=2, topology="explicit",
                     explicit_gamma=((1.0, 2.0),))
    with pytest.raises(DomainError):
        LinkBudget(np.array([[1.0, 0.0], [1.0, 1.0]]))


def test_budget_must_be_2d():
    with pytest.raises(ShapeError):
        LinkBudget(np.ones(3))


def test_same_stream_key_is_deterministic():
    budget = LinkBudget(np.full((2, 4), 10.0))
    a = sample_realization(budget, make_stream(7, 0, 3, 1)).gamma
    b = sample_realization(budget, make_stream(7, 0, 3, 1)).gamma
    assert np.array_equal(a, b)
    c = sample_realization(budget, make_stream(7, 0, 3, 2)).gamma
    assert not np.array_equal(a, c)


def test_law_of_large_numbers():
    budget = LinkBudget(np.array([[81.0]]))
    draws = sample_batch(budget, make_stream(11, 0, 0, 0), 1_000_000)[:, 0, 0]
    stderr = draws.std(ddof=1) / np.sqrt(len(draws))
    assert abs(draws.mean() - 81.0) < 3.0 * stderr


def test_normalized_fading_is_unit_exponential():
    budget = LinkBudget(np.array([[5.0]]))
    draws = sample_batch(budget, make_stream(23, 0, 0, 0), 100_000)[:, 0, 0]
    stat = stats.kstest(draws / 5.0, "expon").statistic
    assert stat < 0.01
