"""Exact and high-SNR end-to-end SNR / rate evaluation for AF chains.

Conventions: instantaneous-SNR arrays are shaped (..., hops, subcarriers);
node k (k = 0..N-1) feeds hop k+1, so beta row k pairs with gamma row k.
Rates are reported in bit/s/Hz (log base 2); internal derivations use ln.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError

_LN2 = np.log(2.0)


@dataclass
class Allocation:
    """Subcarrier fractions mu (F,) and node fractions beta (N, F)."""

    mu: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        if self.mu.ndim != 1 or self.beta.ndim != 2:
            raise ShapeError("mu must be 1-D and beta 2-D")
        if self.beta.shape[1] != self.mu.shape[0]:
            raise ShapeError(
                f"beta shape {self.beta.shape} does not match mu of length {self.mu.shape[0]}")
        if np.any(self.mu < 0) or np.any(self.beta < 0):
            raise DomainError("allocation fractions must be nonnegative")
        if not (np.all(np.isfinite(self.mu)) and np.all(np.isfinite(self.beta))):
            raise DomainError("allocation fractions must be finite")

    @property
    def alpha(self) -> np.ndarray:
        """Absolute power fractions alpha_{k,i} = mu_i * beta_{k,i}."""
        return self.mu[None, :] * self.beta


@dataclass
class RateReport:
    """Per-subcarrier destination SNR plus the chain rate in bit/s/Hz."""

    snr: np.ndarray
    rate: float
    approx_rate: float | None = None


def relay_gain(prev_power: float, gain_sq: float, noise: float,
               target_power: float) -> float:
    """Squared amplification gain holding the node's output power at target."""
    if noise <= 0:
        raise DomainError(f"noise power must be > 0, got {noise}")
    if prev_power < 0 or gain_sq < 0 or target_power < 0:
        raise DomainError("powers and channel gain must be nonnegative")
    return target_power / (prev_power * gain_sq + noise)


def _check_hop_snrs(hop_snrs: np.ndarray) -> np.ndarray:
    arr = np.asarray(hop_snrs, dtype=float)
    if arr.size == 0:
        raise ShapeError("need at least one hop SNR")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise DomainError("hop SNRs must be finite and >= 0")
    return arr


def end_to_end_snr(hop_snrs) -> float:
    """Destination SNR of the AF cascade: (prod_k (1 + 1/g_k) - 1)^-1.

    A single hop passes through exactly; any zero hop breaks the chain and
    yields 0.
    """
    arr = _check_hop_snrs(np.atleast_1d(hop_snrs))
    if np.any(arr == 0.0):
        return 0.0
    log_prod = np.sum(np.log1p(1.0 / arr))
    return float(1.0 / np.expm1(log_prod))


def cascade_snr(hop_snrs) -> float:
    """Left-fold of the pairwise AF composition g12 = g1 g2 / (g1 + g2 + 1).

    Algebraically identical to :func:`end_to_end_snr`; kept as an
    independent cross-check.
    """
    arr = _check_hop_snrs(np.atleast_1d(hop_snrs))
    acc = float(arr[0])
    for g in arr[1:]:
        g = float(g)
        acc = acc * g / (acc + g + 1.0)
    return acc


def elementary_symmetric(x: np.ndarray) -> np.ndarray:
    """e_1..e_N of the last axis via the stable product recurrence."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    e = np.zeros(x.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for k in range(n):
        e[..., 1:k + 2] += x[..., k:k + 1] * e[..., 0:k + 1].copy()
    return e[..., 1:]


def a_coefficients(beta_col, gamma_col) -> np.ndarray:
    """Denominator coefficients [A_1..A_N] of the rate expansion.

    A_m is the degree-m elementary symmetric polynomial in
    x_k = 1 / (beta_k * gamma_{k+1}).
    """
    b = np.asarray(beta_col, dtype=float)
    g = np.asarray(gamma_col, dtype=float)
    if b.shape != g.shape:
        raise ShapeError("beta and gamma columns must have the same shape")
    prod = b * g
    if np.any(prod <= 0) or not np.all(np.isfinite(prod)):
        raise DomainError("every beta_k * gamma_{k+1} must be finite and > 0")
    return elementary_symmetric(1.0 / prod)


def _validate_triplet(gamma, mu, beta):
    gamma = np.asarray(gamma, dtype=float)
    mu = np.asarray(mu, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if gamma.shape != beta.shape:
        raise ShapeError(f"gamma shape {gamma.shape} != beta shape {beta.shape}")
    if mu.shape != gamma.shape[:-2] + gamma.shape[-1:]:
        raise ShapeError(
            f"mu shape {mu.shape} incompatible with gamma shape {gamma.shape}")
    if np.any(gamma < 0) or np.any(mu < 0) or np.any(beta < 0):
        raise DomainError("gamma, mu, beta must be nonnegative")
    return gamma, mu, beta


def rate_batch(gamma, mu, beta) -> np.ndarray:
    """Exact instantaneous rate, vectorized over leading axes.

    gamma/beta: (..., N, F); mu: (..., F). Subcarriers with any zero-power
    hop contribute zero rate.
    """
    gamma, mu, beta = _validate_triplet(gamma, mu, beta)
    n = gamma.shape[-2]
    hop = mu[..., None, :] * beta * gamma
    with np.errstate(divide="ignore"):
        # s = sum_k ln(1 + 1/hop_k); a dead hop gives s = inf and rate 0
        s = np.log1p(np.where(hop > 0, 1.0 / np.where(hop > 0, hop, 1.0), np.inf))
    s = s.sum(axis=-2)
    per_sub = -np.log1p(-np.exp(-s))  # == ln(1 + snr_total), exact for s > 0
    return per_sub.sum(axis=-1) / (n * _LN2)


def snr_batch(gamma, mu, beta) -> np.ndarray:
    """Per-subcarrier destination SNR, vectorized; shape (..., F)."""
    gamma, mu, beta = _validate_triplet(gamma, mu, beta)
    hop = mu[..., None, :] * beta * gamma
    with np.errstate(divide="ignore"):
        s = np.log1p(np.where(hop > 0, 1.0 / np.where(hop > 0, hop, 1.0), np.inf))
    s = s.sum(axis=-2)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(np.isinf(s), 0.0, 1.0 / np.expm1(s))


def subcarrier_loads(gamma, beta) -> np.ndarray:
    """Y_i = sum_k 1/(beta_k gamma_{k+1}) (equals A_1 per subcarrier)."""
    gamma = np.asarray(gamma, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if gamma.shape != beta.shape:
        raise ShapeError("gamma and beta must have the same shape")
    prod = beta * gamma
    with np.errstate(divide="ignore"):
        return np.where(prod > 0, 1.0 / np.where(prod > 0, prod, 1.0), np.inf).sum(axis=-2)


def instantaneous_rate(gamma, allocation: Allocation,
                       include_approx: bool = False) -> RateReport:
    """Exact rate report for one realization and one allocation."""
    mu, beta = allocation.mu, allocation.beta
    snr = snr_batch(gamma, mu, beta)
    rate = float(rate_batch(gamma, mu, beta))
    approx = float(approx_rate(gamma, mu, beta)) if include_approx else None
    return RateReport(snr=snr, rate=rate, approx_rate=approx)


def approx_rate(gamma, mu, beta) -> np.ndarray:
    """High-SNR rate: first-order truncation of the cascade expansion.

    C_app = (1/N) sum_i log2(1 + mu_i / Y_i), upper-bounding the exact rate.
    Subcarriers with mu_i = 0 contribute zero; a zero beta or gamma on an
    active subcarrier is rejected.
    """
    gamma, mu, beta = _validate_triplet(gamma, mu, beta)
    n = gamma.shape[-2]
    loads = subcarrier_loads(gamma, beta)
    active = mu > 0
    if np.any(active & ~np.isfinite(loads)):
        raise DomainError("zero beta or gamma on an active subcarrier")
    safe = np.where(active, loads, 1.0)
    per_sub = np.where(active, np.log1p(mu / safe), 0.0)
    return per_sub.sum(axis=-1) / (n * _LN2)
