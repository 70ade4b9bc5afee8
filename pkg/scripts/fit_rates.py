#!/usr/bin/env python3
"""Fit exponential rates from a run directory's series.csv.

Examples:
    python scripts/fit_rates.py runs/landau --signal field --window 0 10 --mode decay
    python scripts/fit_rates.py runs/two_stream --signal mode2 --window 10 25 --mode growth
"""

import argparse
import sys

import numpy as np

from mbpic.experiments import measure_rate
from mbpic.runio import read_series

SIGNALS = {
    "field": lambda d: np.sqrt(np.abs(d["electric"])),  # field amplitude
    "electric": lambda d: np.abs(d["electric"]),
    "mode1": lambda d: d["mode1"],
    "mode2": lambda d: d["mode2"],
    "energy_err": lambda d: d["H_err_rel"],
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("run_dir")
    parser.add_argument("--signal", choices=sorted(SIGNALS), default="field")
    parser.add_argument("--window", nargs=2, type=float, metavar=("T0", "T1"), required=True)
    parser.add_argument("--mode", choices=("decay", "growth"), default="decay")
    args = parser.parse_args()

    data = read_series(f"{args.run_dir}/series.csv")
    amplitude = SIGNALS[args.signal](data)
    keep = amplitude > 0
    rate = measure_rate(data["t"][keep], amplitude[keep], tuple(args.window), args.mode)
    print(f"{args.signal} {args.mode} rate over t in [{args.window[0]}, {args.window[1]}]: {rate:+.5f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
