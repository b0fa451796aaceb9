"""Sub-problem 2: split the power budget across subcarriers given the node
fractions, exactly (polynomial stationarity) or by high-SNR waterfilling.

The exact route maximizes sum_i ln(1 + mu_i^N / D_i(mu_i)) with D_i built
from the expansion coefficients A of each subcarrier. The high-SNR route is
classic waterfilling on the loads Y_i = A_{1,i}. STPC searches its
multiplier per realization; LTIPC/LTTPC multipliers are calibrated over a
training ensemble and then applied per realization (ergodic waterfilling).
The long-term multiplier fits use the empirical distribution of the loads;
the load density itself has no closed form for general chains.
"""

from __future__ import annotations

import numpy as np

from .calib import (CalibratedMultipliers, KIND_GLOBAL, KIND_PER_SUBCARRIER)
from .errors import (DomainError, InfeasibleError, ShapeError, UsageError)
from .numerics import MuStationarySolver, bisect_decreasing_batch
from .rate import elementary_symmetric, subcarrier_loads

LAMBDA_LO = 1e-14
LAMBDA_HI = 1e14
LONGTERM_MU_MAX = 1e6   # instantaneous cap under expectation constraints


def expansion_coefficients(gamma, beta) -> np.ndarray:
    """Per-subcarrier [A_1..A_N]; shape (..., F, N). Dead hops give inf."""
    gamma = np.asarray(gamma, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if gamma.shape != beta.shape:
        raise ShapeError("gamma and beta must share the (..., N, F) shape")
    prod = beta * gamma
    with np.errstate(divide="ignore"):
        x = np.where(prod > 0, 1.0 / np.where(prod > 0, prod, 1.0), np.inf)
    return elementary_symmetric(np.swapaxes(x, -1, -2))


def waterfill(loads, budget: float = 1.0) -> np.ndarray:
    """Deterministic sort-and-test waterfilling: mu_i = max(w - Y_i, 0).

    Infinite loads (dead subcarriers) are permanently excluded. Vectorized
    over leading axes of ``loads`` (..., F).
    """
    y = np.asarray(loads, dtype=float)
    if budget <= 0:
        raise DomainError(f"budget must be > 0, got {budget}")
    if np.any(np.isnan(y)) or np.any(y < 0):
        raise DomainError("loads must be nonnegative (inf allowed)")
    if y.ndim == 0:
        y = y[None]
    f = y.shape[-1]
    if not np.any(np.isfinite(y), axis=-1).all():
        raise InfeasibleError("a realization has no live subcarrier")
    ys = np.sort(y, axis=-1)
    counts = np.arange(1, f + 1, dtype=float)
    with np.errstate(invalid="ignore"):
        levels = (budget + np.cumsum(ys, axis=-1)) / counts
    ok = levels > ys  # prefix of admissible active counts
    last = f - 1 - np.argmax(ok[..., ::-1], axis=-1)
    level = np.take_along_axis(levels, last[..., None], axis=-1)
    mu = np.maximum(level - y, 0.0)
    # exact budget despite float accumulation error
    return mu * (budget / mu.sum(axis=-1, keepdims=True))


def _solver_for(gamma, beta, mu_max: float) -> MuStationarySolver:
    return MuStationarySolver(expansion_coefficients(gamma, beta), mu_max)


def solve_mu_exact(constraint: str, gamma, beta,
                   multipliers: CalibratedMultipliers | None = None,
                   budget: float = 1.0) -> np.ndarray:
    """Exact subcarrier split; vectorized over leading realization axes."""
    gamma = np.asarray(gamma, dtype=float)
    if constraint == "STPC":
        solver = _solver_for(gamma, beta, mu_max=budget)
        lead = gamma.shape[:-2]

        def residual(lam):
            return solver.solve(lam[..., None]).sum(axis=-1) - budget

        lo = np.full(lead, LAMBDA_LO)
        if np.any(residual(lo) < 0):
            raise InfeasibleError("budget unreachable even at vanishing price")
        lam = bisect_decreasing_batch(residual, lo, np.full(lead, LAMBDA_HI),
                                      iters=90)
        # take the feasible (over-allocating) side of the final bracket and
        # rescale away any residual from a waterline discontinuity
        mu = solver.solve(lam[..., None])
        total = mu.sum(axis=-1, keepdims=True)
        short = total < budget
        if np.any(short):
            mu = np.where(short, solver.solve(0.999999 * lam[..., None]), mu)
            total = mu.sum(axis=-1, keepdims=True)
        return mu * (budget / total)

    if multipliers is None:
        raise UsageError(f"{constraint} requires calibrated multipliers")
    if constraint == "LTIPC":
        multipliers.require(KIND_PER_SUBCARRIER, "LTIPC")
        lam = multipliers.values
    elif constraint == "LTTPC":
        multipliers.require(KIND_GLOBAL, "LTTPC")
        lam = multipliers.values
    else:
        raise UsageError(f"unknown constraint {constraint!r}")
    solver = _solver_for(gamma, beta, mu_max=LONGTERM_MU_MAX)
    return solver.solve(lam)


def calibrate_mu_exact(constraint: str, training_gammas, training_betas,
                       budget: float = 1.0,
                       training_seed: int = 0) -> CalibratedMultipliers:
    """Fit long-term multipliers of the exact split on a training ensemble."""
    if constraint not in ("LTIPC", "LTTPC"):
        raise UsageError(f"no calibration needed for {constraint!r}")
    gammas = np.asarray(training_gammas, dtype=float)
    if gammas.ndim != 3:
        raise ShapeError("training ensemble must be (M, N, F)")
    m, _, f = gammas.shape
    solver = _solver_for(gammas, training_betas, mu_max=LONGTERM_MU_MAX)

    if constraint == "LTIPC":
        lam = bisect_decreasing_batch(
            lambda l: solver.solve(l[None, :]).mean(axis=0) - budget / f,
            np.full(f, LAMBDA_LO), np.full(f, LAMBDA_HI), iters=64)
        return CalibratedMultipliers(KIND_PER_SUBCARRIER, lam, "LTIPC",
                                     training_seed, m, role="mu")
    lam = bisect_decreasing_batch(
        lambda l: np.asarray([solver.solve(l[0]).sum(axis=-1).mean() - budget]),
        np.asarray([LAMBDA_LO]), np.asarray([LAMBDA_HI]), iters=64)
    return CalibratedMultipliers(KIND_GLOBAL, np.asarray(lam[0]), "LTTPC",
                                 training_seed, m, role="mu")


def solve_mu_asy(constraint: str, gamma, beta,
                 multipliers: CalibratedMultipliers | None = None,
                 budget: float = 1.0) -> np.ndarray:
    """High-SNR waterfilling split on the loads Y_i."""
    loads = subcarrier_loads(np.asarray(gamma, dtype=float),
                             np.asarray(beta, dtype=float))
    if constraint == "STPC":
        return waterfill(loads, budget)
    if multipliers is None:
        raise UsageError(f"{constraint} requires calibrated multipliers")
    if constraint == "LTIPC":
        multipliers.require(KIND_PER_SUBCARRIER, "LTIPC")
        lam = multipliers.values
    elif constraint == "LTTPC":
        multipliers.require(KIND_GLOBAL, "LTTPC")
        lam = multipliers.values
    else:
        raise UsageError(f"unknown constraint {constraint!r}")
    return np.maximum(1.0 / lam - loads, 0.0)


def calibrate_mu_asy(constraint: str, training_loads, budget: float = 1.0,
                     training_seed: int = 0) -> CalibratedMultipliers:
    """Fit waterfilling multipliers on the empirical load distribution."""
    if constraint not in ("LTIPC", "LTTPC"):
        raise UsageError(f"no calibration needed for {constraint!r}")
    y = np.asarray(training_loads, dtype=float)
    if y.ndim != 2:
        raise ShapeError("training loads must be (M, F)")
    m, f = y.shape

    if constraint == "LTIPC":
        lam = bisect_decreasing_batch(
            lambda l: np.maximum(1.0 / l[None, :] - y, 0.0).mean(axis=0) - budget / f,
            np.full(f, LAMBDA_LO), np.full(f, LAMBDA_HI), iters=90)
        return CalibratedMultipliers(KIND_PER_SUBCARRIER, lam, "LTIPC",
                                     training_seed, m, role="mu")
    lam = bisect_decreasing_batch(
        lambda l: np.asarray(
            [np.maximum(1.0 / l[0] - y, 0.0).sum(axis=-1).mean() - budget]),
        np.asarray([LAMBDA_LO]), np.asarray([LAMBDA_HI]), iters=90)
    return CalibratedMultipliers(KIND_GLOBAL, np.asarray(lam[0]), "LTTPC",
                                 training_seed, m, role="mu")
