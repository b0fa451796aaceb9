"""System configuration and the plain key=value config-file format.

All SNRs on the user-facing surface are in dB; everything internal is
linear. Powers are fractions of the total budget (P_T = 1, N_0 = 1).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError

TOPOLOGIES = ("balanced", "unbalanced", "explicit")
CONSTRAINTS = ("STPC", "LTIPC", "LTTPC")
SCHEMES = ("EPA", "ASY", "IT-EXA", "IT-ASY")


@dataclass
class SystemConfig:
    """Parameters of one simulated relay chain and its solver settings.

    ``hops`` is the number of hops N (N-1 relays); ``subcarriers`` is the
    OFDM size N_F. ``gamma0_db`` is the average direct-link SNR, possibly a
    sweep list. ``explicit_gamma`` (hops x subcarriers, linear) is only used
    with topology="explicit".
    """

    hops: int = 2
    subcarriers: int = 8
    topology: str = "unbalanced"
    pathloss_exponent: float = 4.0
    gamma0_db: tuple = (10.0,)
    constraint: str = "STPC"
    scheme: tuple = ("EPA",)
    seed: int = 1234
    trials: int = 2000
    training_samples: int = 4000
    eps: float = 1e-4                 # rate-change stop threshold, bit/s/Hz
    max_iter: int = 20                # alternating-optimization cap
    iterations: int = 10              # convergence-study iteration count
    outage_threshold: float = 1.0     # bit/s/Hz
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    root_max_iter: int = 200
    threads: int = 0                  # 0 = machine parallelism
    explicit_gamma: tuple = ()        # tuple of per-hop tuples, linear SNR

    def __post_init__(self):
        if self.hops < 1:
            raise ConfigError(f"hops must be >= 1, got {self.hops}")
        if self.subcarriers < 1:
            raise ConfigError(f"subcarriers must be >= 1, got {self.subcarriers}")
        if self.pathloss_exponent < 2:
            raise ConfigError(
                f"pathloss_exponent must be >= 2, got {self.pathloss_exponent}")
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}")
        if self.constraint not in CONSTRAINTS:
            raise ConfigError(f"unknown constraint {self.constraint!r}")
        if isinstance(self.scheme, str):
            self.scheme = (self.scheme,)
        self.scheme = tuple(self.scheme)
        for s in self.scheme:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}")
        if isinstance(self.gamma0_db, (int, float)):
            self.gamma0_db = (float(self.gamma0_db),)
        self.gamma0_db = tuple(float(g) for g in self.gamma0_db)
        if not self.gamma0_db:
            raise ConfigError("gamma0_db must contain at least one value")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.training_samples < 1:
            raise ConfigError("training_samples must be >= 1")
        for name in ("eps", "abs_tol", "rel_tol"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be > 0")
        if self.max_iter < 1 or self.root_max_iter < 1 or self.iterations < 1:
            raise ConfigError("iteration caps must be >= 1")
        if self.topology == "explicit":
            rows = tuple(tuple(float(v) for v in row) for row in self.explicit_gamma)
            if len(rows) != self.hops or any(len(r) != self.subcarriers for r in rows):
                raise ConfigError(
                    "explicit_gamma must be a hops x subcarriers matrix")
            self.explicit_gamma = rows

    def with_overrides(self, **kw) -> "SystemConfig":
        return replace(self, **kw)


# --- key=value config files ------------------------------------------------

_LIST_KEYS = {"gamma0_db", "scheme"}
_INT_KEYS = {"hops", "subcarriers", "seed", "trials", "training_samples",
             "max_iter", "iterations", "root_max_iter", "threads"}
_FLOAT_KEYS = {"pathloss_exponent", "eps", "outage_threshold",
               "abs_tol", "rel_tol"}
_STR_KEYS = {"topology", "constraint"}
_MATRIX_KEYS = {"explicit_gamma"}

_ALL_KEYS = _LIST_KEYS | _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _MATRIX_KEYS


def _parse_value(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "gamma0_db":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if key == "scheme":
            return tuple(v.strip() for v in raw.split(",") if v.strip())
        if key in _MATRIX_KEYS:
            rows = [r for r in raw.split(";") if r.strip()]
            return tuple(tuple(float(v) for v in r.split(",")) for r in rows)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def parse_config_text(text: str) -> dict:
    """Parse key=value lines (``#`` comments) into a typed dict."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _parse_value(key, raw)
    return out


def load_config(path: str, overrides: dict | None = None) -> SystemConfig:
    """Build a SystemConfig from a config file plus flag overrides."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        values = parse_config_text(fh.read())
    for key, val in (overrides or {}).items():
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = val
    try:
        return SystemConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def dump_config(cfg: SystemConfig) -> str:
    """Render the effective config back into the key=value format."""
    lines = []
    for f in fields(cfg):
        val = getattr(cfg, f.name)
        if f.name == "explicit_gamma":
            if not val:
                continue
            val = ";".join(",".join(f"{v:.10g}" for v in row) for row in val)
        elif isinstance(val, tuple):
            val = ",".join(str(v) for v in val)
        lines.append(f"{f.name} = {val}")
    return "\n".join(lines) + "\n"
