"""Monte-Carlo experiment harness: rate sweeps over the direct-link SNR,
outage curves, convergence studies, and the brute-force grid oracle.

Every sweep point draws its evaluation trials from per-trial counter-based
streams keyed by (seed, stream, point, trial), so results are reproducible
regardless of worker count, and all schemes at a point share the same
realizations (common random numbers). Long-term constraints calibrate on a
disjoint training stream.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import schemes
from .channel import (STREAM_EVAL, STREAM_TRAIN, STREAM_VALIDATE,
                      build_link_budget, make_stream, sample_trials)
from .config import SystemConfig
from .errors import ConfigError, ConvergenceError, DomainError, GuardError
from .rate import rate_batch

CSV_HEADER = ["experiment", "scheme", "constraint", "N", "N_F", "topology",
              "gamma0_db", "metric", "value", "stderr", "trials", "seed"]

MAX_TRIAL_FAILURE_FRACTION = 0.01


@dataclass
class ExperimentResult:
    """Curve points plus the metadata that makes the run reproducible."""

    experiment: str
    constraint: str
    hops: int
    subcarriers: int
    topology: str
    seed: int
    # rows: (scheme, gamma0_db, metric, value, stderr, trials)
    rows: list = field(default_factory=list)

    def add(self, scheme: str, gamma0_db: float, metric: str, value: float,
            stderr: float, trials: int) -> None:
        self.rows.append((scheme, float(gamma0_db), metric, float(value),
                          float(stderr), int(trials)))


def write_result_csv(path: str, results) -> None:
    """Serialize one or more results into the fixed schema, %.10g floats."""
    if isinstance(results, ExperimentResult):
        results = [results]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in results:
            for scheme, g0, metric, value, stderr, trials in r.rows:
                writer.writerow([r.experiment, scheme, r.constraint, r.hops,
                                 r.subcarriers, r.topology, f"{g0:.10g}",
                                 metric, f"{value:.10g}", f"{stderr:.10g}",
                                 trials, r.seed])


def read_result_csv(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _worker_count(cfg: SystemConfig) -> int:
    return cfg.threads if cfg.threads > 0 else (os.cpu_count() or 1)


def _scheme_rates(cfg: SystemConfig, scheme: str, gammas, budget,
                  training) -> np.ndarray:
    """Per-trial exact rates of one scheme on a shared evaluation batch."""
    t, n, f = gammas.shape
    if scheme == "EPA":
        mu, beta = schemes.epa(n, f)
        return rate_batch(gammas, np.broadcast_to(mu, (t, f)),
                          np.broadcast_to(beta, (t, n, f)))
    if scheme == "ASY":
        mults = schemes.calibrate_asy(cfg.constraint, budget, training) \
            if cfg.constraint != "STPC" else None
        mu, beta = schemes.asy_noniterative(cfg.constraint, gammas, budget, mults)
        return rate_batch(gammas, mu, beta)
    if scheme in ("IT-EXA", "IT-ASY"):
        mode = "exact" if scheme == "IT-EXA" else "asy"
        res = schemes.iterate(mode, cfg.constraint, gammas, budget=budget,
                              training_gammas=training, eps=cfg.eps,
                              max_iter=cfg.max_iter, keep_snapshots=False)
        return res.rates_by_step[-1]
    raise ConfigError(f"unknown scheme {scheme!r}")


def _audited_mean(rates: np.ndarray, scheme: str, gamma0_db: float):
    """Mean/stderr over finite trials; fail the point past the error budget."""
    rates = np.atleast_1d(np.asarray(rates, dtype=float))
    good = np.isfinite(rates)
    failed = int(np.count_nonzero(~good))
    if failed > MAX_TRIAL_FAILURE_FRACTION * len(rates):
        raise ConvergenceError(
            f"{scheme} at {gamma0_db} dB: {failed}/{len(rates)} trials failed")
    kept = rates[good]
    stderr = float(kept.std(ddof=1) / np.sqrt(len(kept))) if len(kept) > 1 else 0.0
    return float(kept.mean()), stderr, len(kept)


def _needs_training(cfg: SystemConfig) -> bool:
    if cfg.constraint == "STPC":
        return False
    return any(s != "EPA" for s in cfg.scheme)


def _sweep_point(cfg: SystemConfig, point: int, gamma0_db: float, trials: int):
    budget = build_link_budget(cfg, 10.0 ** (gamma0_db / 10.0))
    gammas = sample_trials(budget, cfg.seed, STREAM_EVAL, point, trials)
    training = sample_trials(budget, cfg.seed, STREAM_TRAIN, point,
                             cfg.training_samples) if _needs_training(cfg) else None
    out = []
    for scheme in cfg.scheme:
        rates = _scheme_rates(cfg, scheme, gammas, budget, training)
        out.append((scheme, rates))
    return out


def _run_points(cfg: SystemConfig, gamma0_db, trials: int):
    """Per-trial rates for every (point, scheme), points fanned across workers."""
    points = list(enumerate(gamma0_db))
    workers = min(_worker_count(cfg), len(points))
    if workers <= 1:
        return [_sweep_point(cfg, p, g0, trials) for p, g0 in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_sweep_point, cfg, p, g0, trials)
                   for p, g0 in points]
        return [f.result() for f in futures]  # point order preserved


def run_sweep(cfg: SystemConfig, gamma0_db=None, trials: int | None = None
              ) -> ExperimentResult:
    """Mean exact rate of each configured scheme versus the direct-link SNR."""
    gamma0_db = tuple(cfg.gamma0_db if gamma0_db is None else gamma0_db)
    trials = cfg.trials if trials is None else int(trials)
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    result = ExperimentResult("sweep", cfg.constraint, cfg.hops,
                              cfg.subcarriers, cfg.topology, cfg.seed)
    for (point, g0), per_scheme in zip(enumerate(gamma0_db),
                                       _run_points(cfg, gamma0_db, trials)):
        for scheme, rates in per_scheme:
            value, stderr, kept = _audited_mean(rates, scheme, g0)
            result.add(scheme, g0, "rate", value, stderr, kept)
    return result


def run_outage(cfg: SystemConfig, gamma0_db=None, trials: int | None = None,
               threshold: float | None = None) -> ExperimentResult:
    """Outage probability P(C < threshold) versus the direct-link SNR."""
    gamma0_db = tuple(cfg.gamma0_db if gamma0_db is None else gamma0_db)
    trials = cfg.trials if trials is None else int(trials)
    if trials < 100:
        raise ConfigError("outage estimation needs trials >= 100")
    threshold = cfg.outage_threshold if threshold is None else float(threshold)
    if np.isnan(threshold):
        raise ConfigError("outage threshold must not be NaN")
    result = ExperimentResult("outage", cfg.constraint, cfg.hops,
                              cfg.subcarriers, cfg.topology, cfg.seed)
    for g0, per_scheme in zip(gamma0_db, _run_points(cfg, gamma0_db, trials)):
        for scheme, rates in per_scheme:
            rates = np.atleast_1d(rates)
            good = np.isfinite(rates)
            failed = int(np.count_nonzero(~good))
            if failed > MAX_TRIAL_FAILURE_FRACTION * len(rates):
                raise ConvergenceError(
                    f"{scheme} at {g0} dB: {failed}/{len(rates)} trials failed")
            kept = rates[good]
            p = float(np.count_nonzero(kept < threshold)) / len(kept)
            stderr = float(np.sqrt(p * (1.0 - p) / len(kept)))
            result.add(scheme, g0, "outage", p, stderr, len(kept))
    return result


def run_convergence(cfg: SystemConfig, trials: int | None = None,
                    iterations: int | None = None) -> ExperimentResult:
    """Mean rate after each alternating iteration; iteration 0 is EPA."""
    trials = cfg.trials if trials is None else int(trials)
    iterations = cfg.iterations if iterations is None else int(iterations)
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")
    iterative = [s for s in cfg.scheme if s in ("IT-EXA", "IT-ASY")]
    if not iterative:
        raise ConfigError("convergence study needs IT-EXA or IT-ASY in scheme")
    g0 = cfg.gamma0_db[0]
    budget = build_link_budget(cfg, 10.0 ** (g0 / 10.0))
    gammas = sample_trials(budget, cfg.seed, STREAM_EVAL, 0, trials)
    training = sample_trials(budget, cfg.seed, STREAM_TRAIN, 0,
                             cfg.training_samples) \
        if cfg.constraint != "STPC" else None
    result = ExperimentResult("convergence", cfg.constraint, cfg.hops,
                              cfg.subcarriers, cfg.topology, cfg.seed)
    for scheme in iterative:
        mode = "exact" if scheme == "IT-EXA" else "asy"
        res = schemes.iterate(mode, cfg.constraint, gammas, budget=budget,
                              training_gammas=training, eps=0.0,
                              max_iter=iterations, keep_snapshots=False)
        per_iter = res.rates_by_step[::2]  # init, then after each mu step
        for i in range(iterations + 1):
            row = per_iter[min(i, len(per_iter) - 1)]  # converged: flat tail
            value, stderr, kept = _audited_mean(row, scheme, g0)
            result.add(scheme, g0, f"rate_iter_{i:02d}", value, stderr, kept)
    return result


# --- brute-force oracle ------------------------------------------------------

def oracle_grid_search(gamma, constraint: str = "STPC",
                       resolution: float = 1e-3):
    """Exhaustive scan of the allocation simplices at step ``resolution``.

    Only meant as an independent correctness oracle: guarded to N <= 2,
    N_F <= 2 and resolution in [1e-4, 1e-2]. Returns (best rate, (mu, beta)).
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim != 2:
        raise GuardError("oracle expects a single (N, F) realization")
    n, f = gamma.shape
    if n > 2 or f > 2:
        raise GuardError(f"oracle guarded to N <= 2 and N_F <= 2, got {n}x{f}")
    if not 1e-4 <= resolution <= 1e-2:
        raise GuardError(f"resolution must lie in [1e-4, 1e-2], got {resolution}")
    if constraint != "STPC":
        raise GuardError("oracle only covers the deterministic constraint")
    if np.any(gamma <= 0) or not np.all(np.isfinite(gamma)):
        raise DomainError("oracle needs finite positive SNRs")

    steps = int(round(1.0 / resolution))
    grid = np.linspace(0.0, 1.0, steps + 1)
    mu_grid = grid if f == 2 else np.asarray([1.0])
    beta_grid = grid if n == 2 else np.asarray([1.0])

    # per subcarrier: best single-subcarrier contribution for every mu value
    n_mu, n_beta = len(mu_grid), len(beta_grid)
    best_contrib = np.empty((f, n_mu))
    best_beta_idx = np.empty((f, n_mu), dtype=np.int64)
    mu_flat = np.repeat(mu_grid, n_beta)
    beta1 = np.tile(beta_grid, n_mu)
    for i in range(f):
        col = gamma[:, i]
        if n == 2:
            beta_all = np.stack([beta1, 1.0 - beta1])[:, :, None]  # (2, K, 1)
        else:
            beta_all = np.ones((1, len(mu_flat), 1))
        g = np.broadcast_to(col[:, None], (n, len(mu_flat)))[..., None]
        contrib = rate_batch(np.moveaxis(g, 1, 0), mu_flat[:, None],
                             np.moveaxis(beta_all, 1, 0))
        table = contrib.reshape(n_mu, n_beta)
        best_beta_idx[i] = np.argmax(table, axis=1)
        best_contrib[i] = np.take_along_axis(table, best_beta_idx[i][:, None],
                                             axis=1)[:, 0]

    if f == 2:
        # mu_2 = 1 - mu_1 walks the grid in reverse
        total = best_contrib[0] + best_contrib[1][::-1]
        j = int(np.argmax(total))
        mu = np.asarray([mu_grid[j], 1.0 - mu_grid[j]])
        picks = [best_beta_idx[0][j], best_beta_idx[1][n_mu - 1 - j]]
    else:
        total = best_contrib[0]
        j = 0
        mu = np.asarray([1.0])
        picks = [best_beta_idx[0][0]]
    if n == 2:
        beta = np.stack([[beta_grid[p] for p in picks],
                         [1.0 - beta_grid[p] for p in picks]])
    else:
        beta = np.ones((1, f))
    return float(np.max(total)), (mu, beta)


# --- validation suite --------------------------------------------------------

def run_validation(cfg: SystemConfig | None = None, quick: bool = True) -> list:
    """Self-checks runnable from the CLI; returns (name, ok, detail) tuples.

    The quick profile runs the N=2, N_F=2 grid-oracle comparison on 100
    random draws plus deterministic constraint audits.
    """
    cfg = cfg or SystemConfig(hops=2, subcarriers=2, gamma0_db=(10.0,))
    n_oracle = 100 if quick else 500
    h = 1e-3
    budget = build_link_budget(SystemConfig(
        hops=2, subcarriers=2, topology=cfg.topology,
        pathloss_exponent=cfg.pathloss_exponent, gamma0_db=cfg.gamma0_db[:1]))
    gammas = sample_trials(budget, cfg.seed, STREAM_VALIDATE, 0, n_oracle)

    res = schemes.iterate("exact", "STPC", gammas)
    solver_rates = res.rates_by_step[-1]
    worst_gap = -np.inf
    for t in range(n_oracle):
        oracle_rate, _ = oracle_grid_search(gammas[t], resolution=h)
        worst_gap = max(worst_gap, oracle_rate - solver_rates[t])
    checks = [("grid_oracle_gap", bool(worst_gap <= 1e-3),
               f"max oracle-solver rate gap {worst_gap:.3e} (limit 1e-3)")]

    mu_err = float(np.abs(res.mu.sum(axis=-1) - 1.0).max())
    beta_err = float(np.abs(res.beta.sum(axis=-2) - 1.0).max())
    checks.append(("stpc_sums", bool(mu_err < 1e-8 and beta_err < 1e-8),
                   f"max |sum-1|: mu {mu_err:.2e}, beta {beta_err:.2e}"))

    steps = res.rates_by_step
    drop = float((steps[1:] - steps[:-1]).min())
    checks.append(("monotone_half_steps", bool(drop >= -1e-9),
                   f"worst per-trial half-step change {drop:.3e}"))

    epa_rates = _scheme_rates(cfg.with_overrides(
        hops=2, subcarriers=2, constraint="STPC", scheme=("EPA",)),
        "EPA", gammas, budget, None)
    checks.append(("itexa_beats_epa", bool(np.all(solver_rates >= epa_rates - 1e-12)),
                   f"min IT-EXA - EPA margin {float((solver_rates - epa_rates).min()):.3e}"))
    return checks
