"""Command-line front end: bind key=value config files to experiments.

Exit codes: 0 success, 1 config/usage error, 2 solver or convergence
failure, 3 validation failure. Every run echoes its effective config into
``<out>.resolved.cfg`` so results are replayable from artifacts alone.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import relaypa, subpa
from .calib import write_multipliers_csv
from .channel import STREAM_TRAIN, build_link_budget, sample_trials
from .config import SystemConfig, dump_config, load_config
from .errors import AfRelayError, ConfigError
from .simkit import (run_convergence, run_outage, run_sweep, run_validation,
                     write_result_csv)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VALIDATION = 3

_OVERRIDE_FLAGS = {
    "hops": int, "subcarriers": int, "seed": int, "trials": int,
    "training_samples": int, "max_iter": int, "iterations": int,
    "threads": int, "pathloss_exponent": float, "eps": float,
    "outage_threshold": float, "topology": str, "constraint": str,
    "gamma0_db": str, "scheme": str,
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via ConfigError, not SystemExit."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="afrelay",
                     description="Multi-hop OFDM relay power-allocation "
                                 "experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (("sweep", "mean rate vs direct-link SNR"),
                       ("outage", "outage probability vs direct-link SNR"),
                       ("converge", "mean rate vs iteration count"),
                       ("calibrate", "emit long-term multipliers as CSV"),
                       ("validate", "run the built-in oracle checks")):
        p = sub.add_parser(name, help=desc)
        if name != "validate":
            p.add_argument("--config", required=True, help="key=value file")
            p.add_argument("--out", required=True, help="output CSV path")
        else:
            p.add_argument("--config", help="optional key=value file")
            p.add_argument("--quick", action="store_true",
                           help="small oracle sample (100 draws)")
        for key, typ in _OVERRIDE_FLAGS.items():
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ,
                           default=None, help=f"override config {key}")
    return parser


def _overrides(args) -> dict:
    out = {}
    for key in _OVERRIDE_FLAGS:
        val = getattr(args, key, None)
        if val is None:
            continue
        if key == "gamma0_db":
            val = tuple(float(v) for v in val.split(","))
        elif key == "scheme":
            val = tuple(v.strip() for v in val.split(","))
        out[key] = val
    return out


def _load(args) -> SystemConfig:
    overrides = _overrides(args)
    if getattr(args, "config", None):
        return load_config(args.config, overrides)
    return SystemConfig(**overrides)


def _write_sidecar(out_path: str, cfg: SystemConfig) -> None:
    directory = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(directory, exist_ok=True)
    with open(out_path + ".resolved.cfg", "w") as fh:
        fh.write(dump_config(cfg))


def _cmd_calibrate(cfg: SystemConfig, out_path: str) -> None:
    """Fit and store the long-term multipliers of the non-iterated solvers."""
    if cfg.constraint == "STPC":
        raise ConfigError("STPC has no offline multipliers to calibrate")
    budget = build_link_budget(cfg)
    training = sample_trials(budget, cfg.seed, STREAM_TRAIN, 0,
                             cfg.training_samples)
    f = cfg.subcarriers
    mu0 = np.full((cfg.training_samples, f), 1.0 / f)
    beta_m = relaypa.calibrate_beta_exact(cfg.constraint,
                                          training_gammas=training,
                                          training_mus=mu0,
                                          training_seed=cfg.seed)
    betas = relaypa.solve_beta_exact(cfg.constraint, training, mu0, beta_m)
    mu_m = subpa.calibrate_mu_exact(cfg.constraint, training, betas,
                                    training_seed=cfg.seed)
    write_multipliers_csv(out_path, [beta_m, mu_m])


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _load(args)
    except (ConfigError, AfRelayError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "validate":
            checks = run_validation(cfg, quick=bool(getattr(args, "quick", True)))
            failed = [c for c in checks if not c[1]]
            for name, ok, detail in checks:
                print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
            return EXIT_VALIDATION if failed else EXIT_OK

        _write_sidecar(args.out, cfg)
        if args.command == "sweep":
            write_result_csv(args.out, run_sweep(cfg))
        elif args.command == "outage":
            write_result_csv(args.out, run_outage(cfg))
        elif args.command == "converge":
            write_result_csv(args.out, run_convergence(cfg))
        elif args.command == "calibrate":
            _cmd_calibrate(cfg, args.out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AfRelayError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
