"""Power allocation for multi-hop OFDM amplify-and-forward relay chains.

Submodules: ``config`` (system parameters), ``channel`` (link budgets and
Rayleigh sampling), ``rate`` (end-to-end SNR and rate), ``numerics``
(root finding, expectations, the budget stationarity solver), ``relaypa``
(node split per subcarrier), ``subpa`` (subcarrier split), ``schemes``
(EPA / ASY / alternating drivers), ``simkit`` (Monte-Carlo experiments)
and ``cli``.
"""

from .config import CONSTRAINTS, SCHEMES, TOPOLOGIES, SystemConfig, load_config
from .channel import (ChannelRealization, LinkBudget, build_link_budget,
                      make_stream, sample_batch, sample_realization,
                      sample_trials)
from .errors import (AfRelayError, BracketError, ConfigError,
                     ConvergenceError, DomainError, GuardError,
                     InfeasibleError, ShapeError, UsageError)
from .rate import (Allocation, RateReport, cascade_snr, end_to_end_snr,
                   instantaneous_rate, rate_batch, snr_batch)
from .schemes import IterateResult, IterationTrace, asy_noniterative, epa, iterate
from .simkit import (ExperimentResult, oracle_grid_search, run_convergence,
                     run_outage, run_sweep, run_validation, write_result_csv)

__all__ = [
    "AfRelayError", "Allocation", "BracketError", "ChannelRealization",
    "ConfigError", "ConvergenceError", "CONSTRAINTS", "DomainError",
    "ExperimentResult", "GuardError", "InfeasibleError", "IterateResult",
    "IterationTrace", "LinkBudget", "RateReport", "SCHEMES", "ShapeError",
    "SystemConfig", "TOPOLOGIES", "UsageError", "asy_noniterative",
    "build_link_budget", "cascade_snr", "end_to_end_snr", "epa",
    "instantaneous_rate", "iterate", "load_config", "make_stream",
    "oracle_grid_search", "rate_batch", "run_convergence", "run_outage",
    "run_sweep", "run_validation", "sample_batch", "sample_realization",
    "sample_trials", "snr_batch", "write_result_csv",
]

__version__ = "0.1.0"
