#!/usr/bin/env python3
"""Run one of the canned benchmarks, optionally downscaled for a quick look.

Examples:
    python scripts/run_benchmark.py landau
    python scripts/run_benchmark.py two_stream --scheme discrete_gradient
    python scripts/run_benchmark.py finite_grid --particles 10000 --t-final 20 --desk
"""

import argparse
import sys
import time

from mbpic.cli import execute_run
from mbpic.experiments import EXPERIMENT_NAMES
from mbpic.runio import parse_config


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("experiment", choices=EXPERIMENT_NAMES)
    parser.add_argument("--scheme", default=None, help="lie | strang | comp4 | discrete_gradient")
    parser.add_argument("--particles", type=int, default=None)
    parser.add_argument("--t-final", type=float, default=None)
    parser.add_argument("--backend", default=None, help="fd | fem")
    parser.add_argument("--record-every", type=int, default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--desk", action="store_true", help="shortcut: 1e4 particles, t_final 10")
    args = parser.parse_args()

    overrides = {"experiment": args.experiment}
    if args.desk:
        overrides.update({"N_p": 10000, "t_final": 10})
    for key, value in (
        ("N_p", args.particles),
        ("t_final", args.t_final),
        ("scheme", args.scheme),
        ("field_backend", args.backend),
        ("record_every", args.record_every),
    ):
        if value is not None:
            overrides[key] = value
    overrides["output_dir"] = args.out or "runs/" + args.experiment

    cfg = parse_config("\n".join(f"{k} = {v}" for k, v in overrides.items()) + "\n")
    t0 = time.time()
    out = execute_run(cfg)
    print(f"done in {time.time() - t0:.1f}s -> {out / 'series.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
