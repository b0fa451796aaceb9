#!/usr/bin/env python3
"""Outage probability vs SNR for the individual-power long-term constraint.

Writes results/outage_ltipc.csv (threshold 1 bit/s/Hz).
"""
import argparse
import pathlib
import sys
import tempfile

from afrelay.cli import main as cli_main

CFG = """
hops = 2
subcarriers = 8
constraint = LTIPC
scheme = EPA,IT-EXA
gamma0_db = -20,-15,-10,-5,0
outage_threshold = 1.0
trials = {trials}
training_samples = {training}
seed = 7
threads = 0
"""

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--full", action="store_true",
                    help="use 2000 trials instead of 400")
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    out = outdir / "outage_ltipc.csv"
    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(CFG.format(trials=2000 if args.full else 400,
                            training=3000 if args.full else 1000))
        cfg_path = fh.name
    rc = cli_main(["outage", "--config", cfg_path, "--out", str(out)])
    if rc == 0:
        print(f"wrote {out}")
    sys.exit(rc)
