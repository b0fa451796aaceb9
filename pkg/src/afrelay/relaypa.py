"""Sub-problem 1: split each subcarrier's power across the transmitting
nodes, exactly (Lagrangian stationarity) or via high-SNR closed forms.

Shapes follow the package convention: gamma and beta are (..., N, F) with
leading realization axes; mu is (..., F). The exact stationarity point for
one node is

    beta = (-1 + sqrt(1 + 4 c / lam)) / (2 c),   c = mu * gamma,

evaluated in the equivalent cancellation-free form 2 / (lam (1 + sqrt(1 +
4c/lam))), which remains valid as c -> 0. Under STPC a per-subcarrier
multiplier enforces sum_k beta = 1 on the instantaneous channel; under
LTIPC/LTTPC multipliers are calibrated offline so the node (resp. total)
expectation constraint holds over the fading distribution, after which each
node needs only its own forward-channel gain (decentralized operation).
"""

from __future__ import annotations

import numpy as np

from .calib import (CalibratedMultipliers, KIND_GLOBAL,
                    KIND_PER_NODE_PER_SUBCARRIER, KIND_PER_SUBCARRIER)
from .channel import LinkBudget
from .errors import DomainError, ShapeError, UsageError
from .numerics import bisect, bisect_decreasing_batch, expect_exponential

LAMBDA_LO = 1e-14
LAMBDA_HI = 1e14


def beta_stationary(c, lam):
    """Stationary node fraction for load c = mu*gamma and multiplier lam."""
    c = np.asarray(c, dtype=float)
    lam = np.asarray(lam, dtype=float)
    return 2.0 / (lam * (1.0 + np.sqrt(1.0 + 4.0 * c / lam)))


def _check_gamma(gamma) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim < 2:
        raise ShapeError("gamma must have (..., hops, subcarriers) shape")
    if np.any(gamma <= 0) or not np.all(np.isfinite(gamma)):
        raise DomainError("instantaneous SNRs must be finite and > 0")
    return gamma


def _solve_stpc(gamma: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Per-subcarrier multiplier bisection so sum_k beta = 1 exactly."""
    n = gamma.shape[-2]
    c = mu[..., None, :] * gamma

    def residual(lam):
        return beta_stationary(c, lam[..., None, :]).sum(axis=-2) - 1.0

    lam = bisect_decreasing_batch(
        residual,
        np.full(mu.shape, LAMBDA_LO),
        np.full(mu.shape, LAMBDA_HI),
        iters=90)
    beta = beta_stationary(c, lam[..., None, :])
    beta = beta / beta.sum(axis=-2, keepdims=True)
    return np.where(mu[..., None, :] > 0, beta, 1.0 / n)


def solve_beta_exact(constraint: str, gamma, mu,
                     multipliers: CalibratedMultipliers | None = None) -> np.ndarray:
    """Exact node split for every realization/subcarrier.

    STPC solves its multiplier in place; LTIPC/LTTPC require multipliers
    from :func:`calibrate_beta_exact`. Subcarriers with mu = 0 get the inert
    placeholder beta = 1/N.
    """
    gamma = _check_gamma(gamma)
    mu = np.asarray(mu, dtype=float)
    n = gamma.shape[-2]
    if mu.shape != gamma.shape[:-2] + gamma.shape[-1:]:
        raise ShapeError(f"mu shape {mu.shape} incompatible with gamma {gamma.shape}")
    if np.any(mu < 0):
        raise DomainError("mu must be nonnegative")

    if constraint == "STPC":
        return _solve_stpc(gamma, mu)

    if multipliers is None:
        raise UsageError(f"{constraint} requires calibrated multipliers")
    if constraint == "LTIPC":
        multipliers.require(KIND_PER_NODE_PER_SUBCARRIER, "LTIPC")
        lam = multipliers.values
    elif constraint == "LTTPC":
        multipliers.require(KIND_PER_SUBCARRIER, "LTTPC")
        lam = multipliers.values[None, :]
    else:
        raise UsageError(f"unknown constraint {constraint!r}")
    beta = beta_stationary(mu[..., None, :] * gamma, lam)
    return np.where(mu[..., None, :] > 0, beta, 1.0 / n)


def calibrate_beta_exact(constraint: str, *,
                         training_gammas=None, training_mus=None,
                         budget: LinkBudget | None = None, mu=None,
                         training_seed: int = 0) -> CalibratedMultipliers:
    """Fit the long-term multipliers of the exact node split.

    Two routes: a Monte-Carlo route over a training ensemble of
    (realization, mu) pairs, used inside the iterative driver where mu
    varies per realization; and a quadrature route against the exponential
    fading law of a :class:`LinkBudget` for one fixed mu vector.
    """
    if constraint not in ("LTIPC", "LTTPC"):
        raise UsageError(f"no calibration needed for {constraint!r}")

    if training_gammas is not None:
        gammas = _check_gamma(np.asarray(training_gammas, dtype=float))
        mus = np.asarray(training_mus, dtype=float)
        if gammas.ndim != 3 or mus.shape != (gammas.shape[0], gammas.shape[2]):
            raise ShapeError("training ensemble must be (M, N, F) with mus (M, F)")
        m, n, f = gammas.shape
        c = mus[:, None, :] * gammas
        active = mus[:, None, :] > 0

        def mean_beta(lam):  # lam (N, F)
            b = np.where(active, beta_stationary(c, lam[None]), 1.0 / n)
            return b.mean(axis=0)

        if constraint == "LTIPC":
            lam = bisect_decreasing_batch(
                lambda l: mean_beta(l) - 1.0 / n,
                np.full((n, f), LAMBDA_LO), np.full((n, f), LAMBDA_HI), iters=90)
            return CalibratedMultipliers(KIND_PER_NODE_PER_SUBCARRIER, lam,
                                         "LTIPC", training_seed, m, role="beta")
        lam = bisect_decreasing_batch(
            lambda l: mean_beta(np.broadcast_to(l, (n, f))).sum(axis=0) - 1.0,
            np.full(f, LAMBDA_LO), np.full(f, LAMBDA_HI), iters=90)
        return CalibratedMultipliers(KIND_PER_SUBCARRIER, lam, "LTTPC",
                                     training_seed, m, role="beta")

    if budget is None or mu is None:
        raise UsageError("need either a training ensemble or (budget, mu)")
    mu = np.asarray(mu, dtype=float)
    n, f = budget.hops, budget.subcarriers
    if mu.shape != (f,):
        raise ShapeError(f"mu must have shape ({f},)")

    def node_mean(k, i, lam):
        if mu[i] == 0:
            return 1.0 / n
        return expect_exponential(
            lambda g: beta_stationary(mu[i] * g, lam),
            budget.gamma_avg[k, i]).value

    if constraint == "LTIPC":
        lam = np.empty((n, f))
        for k in range(n):
            for i in range(f):
                lam[k, i] = bisect(
                    lambda l: node_mean(k, i, l) - 1.0 / n, LAMBDA_LO, LAMBDA_HI)
        return CalibratedMultipliers(KIND_PER_NODE_PER_SUBCARRIER, lam,
                                     "LTIPC", training_seed, 0, role="beta")
    lam = np.empty(f)
    for i in range(f):
        lam[i] = bisect(
            lambda l: sum(node_mean(k, i, l) for k in range(n)) - 1.0,
            LAMBDA_LO, LAMBDA_HI)
    return CalibratedMultipliers(KIND_PER_SUBCARRIER, lam, "LTTPC",
                                 training_seed, 0, role="beta")


def solve_beta_asy(constraint: str, gamma,
                   budget: LinkBudget | None = None) -> np.ndarray:
    """High-SNR closed-form node split; independent of mu.

    LTIPC: beta = sqrt(Gamma/(pi gamma)) / N (statistics of all other nodes
    unused -- fully decentralized). LTTPC: beta = 1/(sqrt(pi) sum_j
    sqrt(gamma/Gamma_j)). STPC: beta = 1/(sum_j sqrt(gamma/gamma_j)), which
    sums to one per subcarrier by construction.
    """
    gamma = _check_gamma(gamma)
    if constraint == "STPC":
        inv_sqrt = 1.0 / np.sqrt(gamma)
        return inv_sqrt / inv_sqrt.sum(axis=-2, keepdims=True)
    if budget is None:
        raise UsageError(f"{constraint} closed forms need the link budget")
    avg = budget.gamma_avg
    if avg.shape != gamma.shape[-2:]:
        raise ShapeError("budget shape does not match realizations")
    n = gamma.shape[-2]
    if constraint == "LTIPC":
        return np.sqrt(avg / (np.pi * gamma)) / n
    if constraint == "LTTPC":
        stat_sum = (1.0 / np.sqrt(avg)).sum(axis=0)  # (F,)
        return 1.0 / (np.sqrt(np.pi * gamma) * stat_sum)
    raise UsageError(f"unknown constraint {constraint!r}")
