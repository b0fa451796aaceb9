#!/usr/bin/env python3
"""Desk-scale average-rate sweep over SNR for all four schemes.

Writes results/rate_sweep_<constraint>.csv plus a resolved-config sidecar.
Pass --full for publication-scale trial counts.
"""
import argparse
import pathlib
import sys
import tempfile

from afrelay.cli import main as cli_main

CFG = """
hops = {hops}
subcarriers = 8
constraint = {constraint}
scheme = EPA,ASY,IT-ASY,IT-EXA
gamma0_db = -10,-5,0,5,10,15,20
trials = {trials}
training_samples = {training}
seed = 7
threads = 0
"""


def run(constraint: str, hops: int, trials: int, training: int,
        outdir: pathlib.Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    out = outdir / f"rate_sweep_{constraint.lower()}.csv"
    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(CFG.format(hops=hops, constraint=constraint, trials=trials,
                            training=training))
        cfg_path = fh.name
    rc = cli_main(["sweep", "--config", cfg_path, "--out", str(out)])
    if rc == 0:
        print(f"wrote {out}")
    return rc


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--full", action="store_true",
                    help="use 2000 trials instead of 300")
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    trials = 2000 if args.full else 300
    training = 3000 if args.full else 1000
    rc = 0
    for constraint, hops in (("LTTPC", 2), ("STPC", 3), ("LTIPC", 2)):
        rc = rc or run(constraint, hops, trials, training,
                       pathlib.Path(args.outdir))
    sys.exit(rc)
