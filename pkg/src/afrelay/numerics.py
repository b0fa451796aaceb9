"""Shared numeric kernels: bracketed root finding, expectations over
exponential fading, and the per-subcarrier budget stationarity solve."""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, ConvergenceError, DomainError

# Composite rule for E[g(X)], X ~ Exp(1): split at t = 1, substitute t = u^2
# on [0, 1] so integrands with an x^(-1/2) profile near zero (common for the
# allocation closed forms) stay smooth, Gauss-Laguerre on the tail.
_LEG_NODES, _LEG_WEIGHTS = np.polynomial.legendre.leggauss(96)
_U_NODES = 0.5 * (_LEG_NODES + 1.0)                       # [0, 1]
_HEAD_T = _U_NODES ** 2
_HEAD_W = 0.5 * _LEG_WEIGHTS * 2.0 * _U_NODES * np.exp(-_HEAD_T)
_LAG_NODES, _LAG_WEIGHTS = np.polynomial.laguerre.laggauss(96)
_TAIL_T = 1.0 + _LAG_NODES
_TAIL_W = np.exp(-1.0) * _LAG_WEIGHTS


@dataclass(frozen=True)
class RootConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0 or self.max_iter <= 0:
            raise DomainError("root tolerances and iteration cap must be > 0")


DEFAULT_ROOT = RootConfig()


def bisect(f, lo: float, hi: float, cfg: RootConfig = DEFAULT_ROOT) -> float:
    """Bracketed bisection for a monotone scalar function."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise BracketError(f"f({lo}) = {flo} and f({hi}) = {fhi} do not bracket a root")
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        # rel_tol only matters for roots too large for abs_tol in float
        width_tol = max(cfg.abs_tol, cfg.rel_tol * cfg.abs_tol * abs(mid))
        if abs(fm) <= cfg.abs_tol or (hi - lo) <= width_tol or mid in (lo, hi):
            return mid
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
    raise ConvergenceError(
        f"bisection did not converge in {cfg.max_iter} iterations",
        best=0.5 * (lo + hi))


def bisect_decreasing_batch(f, lo, hi, iters: int = 80, logspace: bool = True):
    """Vectorized bisection for an elementwise-decreasing residual.

    ``f`` maps an array of unknowns to same-shaped residuals with
    f(lo) >= 0 >= f(hi) per element.
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    flo, fhi = f(lo), f(hi)
    bad = (flo < 0) | (fhi > 0)
    if np.any(bad):
        raise BracketError(
            f"{int(np.count_nonzero(bad))} element(s) fail to bracket a root")
    for _ in range(iters):
        mid = np.sqrt(lo * hi) if logspace else 0.5 * (lo + hi)
        keep_lo = f(mid) >= 0
        lo = np.where(keep_lo, mid, lo)
        hi = np.where(keep_lo, hi, mid)
    return np.sqrt(lo * hi) if logspace else 0.5 * (lo + hi)


Expectation = namedtuple("Expectation", ["value", "stderr"])


def expect_exponential(g, gamma_avg: float, method: str = "quadrature",
                       samples: int = 100_000, seed: int = 0) -> Expectation:
    """E[g(X)] for X ~ Exponential(mean = gamma_avg).

    ``quadrature`` uses a singularity-tolerant fixed rule (Gauss-Legendre
    under t = u^2 on [0, 1] plus Gauss-Laguerre on the tail, after
    x = gamma_avg * t); ``monte_carlo`` uses a seeded sample mean and reports
    its standard error. ``g`` must accept numpy arrays.
    """
    if gamma_avg <= 0 or not np.isfinite(gamma_avg):
        raise DomainError(f"exponential mean must be finite and > 0, got {gamma_avg}")
    if method == "quadrature":
        head = np.asarray(g(gamma_avg * _HEAD_T), dtype=float)
        tail = np.asarray(g(gamma_avg * _TAIL_T), dtype=float)
        if not (np.all(np.isfinite(head)) and np.all(np.isfinite(tail))):
            raise DomainError("integrand returned non-finite values")
        return Expectation(float(_HEAD_W @ head + _TAIL_W @ tail), 0.0)
    if method == "monte_carlo":
        rng = np.random.default_rng(seed)
        vals = np.asarray(g(gamma_avg * rng.standard_exponential(samples)), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise DomainError("integrand returned non-finite values")
        return Expectation(float(vals.mean()),
                           float(vals.std(ddof=1) / np.sqrt(samples)))
    raise DomainError(f"unknown expectation method {method!r}")


class MuStationarySolver:
    """Budget response mu(lambda) maximizing ln(1 + mu^N / D(mu)) - lambda*mu.

    D(mu) = sum_m A_m mu^(N-m) with the expansion coefficients A as rows of
    ``coeffs`` (..., N). For N >= 2 the per-subcarrier utility is S-shaped
    (marginal utility rises from 0 before falling), so the maximizer is
    either 0 or the root of the marginal utility on its decreasing branch,
    whichever scores higher. Rows with non-finite coefficients (dead hops)
    always yield 0.

    The marginal-utility peak is located once at construction (geometric
    scan plus golden refinement), so repeated :meth:`solve` calls inside an
    outer multiplier search stay cheap.
    """

    GRID_POINTS = 192
    GRID_LO = 1e-18
    REFINE_ITERS = 48
    ROOT_ITERS = 64

    def __init__(self, coeffs: np.ndarray, mu_max: float):
        if mu_max <= 0 or not np.isfinite(mu_max):
            raise DomainError(f"mu_max must be finite and > 0, got {mu_max}")
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim < 1 or coeffs.shape[-1] < 1:
            raise DomainError("need at least one expansion coefficient per row")
        self.n = coeffs.shape[-1]
        self.mu_max = float(mu_max)
        self.dead = ~np.all(np.isfinite(coeffs) & (coeffs > 0), axis=-1)
        self.coeffs = np.where(self.dead[..., None], 1.0, coeffs)
        self._locate_peak()

    # -- internals ---------------------------------------------------------

    def _d_poly(self, mu):
        """D(mu) and D'(mu) by Horner over the coefficient axis."""
        a = self.coeffs
        d = a[..., 0] * np.ones_like(mu)
        for m in range(1, self.n):
            d = d * mu + a[..., m]
        if self.n == 1:
            return d, np.zeros_like(d)
        dp = (self.n - 1) * a[..., 0] * np.ones_like(mu)
        for m in range(1, self.n - 1):
            dp = dp * mu + (self.n - 1 - m) * a[..., m]
        return d, dp

    def marginal(self, mu):
        """d/dmu ln(1 + mu^N / D(mu)): positive, ~1/mu for large mu."""
        d, dp = self._d_poly(mu)
        mu_pow = mu ** self.n
        num = self.n * mu ** (self.n - 1) * d - mu_pow * dp
        return num / (d * d + mu_pow * d)

    def utility(self, mu):
        """ln(1 + mu^N / D(mu))."""
        d, _ = self._d_poly(mu)
        return np.log1p(mu ** self.n / d)

    def _locate_peak(self):
        grid = np.geomspace(self.GRID_LO, self.mu_max, self.GRID_POINTS)
        shape = self.coeffs.shape[:-1]
        best = np.full(shape, -np.inf)
        best_idx = np.zeros(shape, dtype=np.int64)
        for j, mu in enumerate(grid):
            phi = self.marginal(np.asarray(mu))
            better = phi > best
            best = np.where(better, phi, best)
            best_idx = np.where(better, j, best_idx)
        lo = grid[np.maximum(best_idx - 1, 0)]
        hi = grid[np.minimum(best_idx + 1, self.GRID_POINTS - 1)]
        # ternary refinement in log-mu around the best grid point
        llo, lhi = np.log(lo), np.log(hi)
        for _ in range(self.REFINE_ITERS):
            m1 = llo + (lhi - llo) / 3.0
            m2 = lhi - (lhi - llo) / 3.0
            left_worse = self.marginal(np.exp(m1)) < self.marginal(np.exp(m2))
            llo = np.where(left_worse, m1, llo)
            lhi = np.where(left_worse, lhi, m2)
        refined = np.exp(0.5 * (llo + lhi))
        phi_ref = self.marginal(refined)
        self.mu_peak = np.where(phi_ref >= best, refined, grid[best_idx])
        self.phi_peak = np.maximum(phi_ref, best)
        self._phi_at_max = self.marginal(np.asarray(self.mu_max))

    # -- public ------------------------------------------------------------

    def solve(self, lam) -> np.ndarray:
        """Maximizer over [0, mu_max] for multiplier ``lam`` (broadcastable)."""
        lam = np.asarray(lam, dtype=float)
        if np.any(lam <= 0):
            raise DomainError("multiplier must be > 0")
        shape = np.broadcast_shapes(self.coeffs.shape[:-1], lam.shape)
        lam = np.broadcast_to(lam, shape)
        active = np.broadcast_to(self.phi_peak > lam, shape) & ~np.broadcast_to(self.dead, shape)
        saturated = np.broadcast_to(self._phi_at_max >= lam, shape)
        # root of marginal(mu) = lam on the decreasing branch, in log-mu
        llo = np.log(np.broadcast_to(self.mu_peak, shape)).copy()
        lhi = np.full(shape, np.log(self.mu_max))
        for _ in range(self.ROOT_ITERS):
            mid = 0.5 * (llo + lhi)
            go_right = self.marginal(np.exp(mid)) > lam
            llo = np.where(go_right, mid, llo)
            lhi = np.where(go_right, lhi, mid)
        cand = np.where(saturated, self.mu_max, np.exp(0.5 * (llo + lhi)))
        gain = self.utility(cand) - lam * cand
        out = np.where(active & (gain > 0), cand, 0.0)
        return np.minimum(out, self.mu_max)


def solve_stationary_mu(coeffs, lam_eff: float, mu_max: float = 1.0) -> float:
    """Scalar front end of :class:`MuStationarySolver` for one subcarrier."""
    arr = np.asarray(coeffs, dtype=float)
    if arr.ndim != 1:
        raise DomainError("coefficient list must be 1-D")
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise DomainError("expansion coefficients must be finite and > 0")
    if lam_eff <= 0:
        raise DomainError(f"multiplier must be > 0, got {lam_eff}")
    solver = MuStationarySolver(arr[None, :], mu_max)
    return float(solver.solve(np.asarray([lam_eff]))[0])
