#!/usr/bin/env python3
"""Run every experiment with its defaults and collect artifacts.

Usage:
    python scripts/run_all_experiments.py [--out OUTDIR] [--seed N]

Writes one artifact directory per experiment under OUTDIR and prints the
combined pass/fail summary.  Exit code 0 iff everything passes.
"""

import argparse
import sys
import time
from pathlib import Path

from trunclap.cli import main as cli_main

EXPERIMENTS = (
    "matrix-check",
    "oracle-check",
    "critical-exponent",
    "anti-hopf",
    "rescaling",
    "ordering",
    "superlinear-pplus",
    "sandwich",
)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="out")
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    failures = []
    t0 = time.time()
    for name in EXPERIMENTS:
        out_dir = Path(args.out) / name
        print(f"=== {name} -> {out_dir}")
        rc = cli_main([name, "--seed", str(args.seed), "--out", str(out_dir)])
        if rc != 0:
            failures.append(name)
    print(f"\ntotal wall time {time.time() - t0:.0f}s")
    if failures:
        print("FAILED:", ", ".join(failures))
        return 1
    print("all experiments passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
