"""Command-line entry points: run experiments, query the dispersion solver."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dispersion import DispersionParams, NoRoot, solve_growth_rate
from .dynamics import HamiltonianContext, run_n_steps
from .experiments import EXPERIMENT_NAMES, sample_initial
from .fem import FemContext, FemSpace
from .field import ElectronModel, NonConvergence, StiffnessOperator
from .mesh import BSplineShape, Grid1D
from .runio import ParseError, RunConfig, ValidationError, parse_config, write_series, write_snapshot

__all__ = ["build_context", "execute_run", "main", "entry"]


def build_context(cfg: RunConfig):
    """Assemble the field backend named by the run configuration."""
    ic = cfg.ic
    grid = Grid1D(n_cells=ic.N, length=ic.L)
    model = ElectronModel(n0=ic.n0, Te=ic.Te)
    if cfg.field_backend == "fem":
        return FemContext(FemSpace(grid, cfg.fem_degree), model, cfg.solver)
    shape = BSplineShape(degree=ic.degree, dx=grid.dx)
    stiffness = StiffnessOperator(n=grid.n_cells, dx=grid.dx)
    return HamiltonianContext(grid=grid, shape=shape, stiffness=stiffness, model=model, solver=cfg.solver)


def execute_run(cfg: RunConfig) -> Path:
    """Run the configured experiment; writes series.csv and snapshots, returns the dir."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = build_context(cfg)
    particles = sample_initial(cfg.ic)
    n_steps = int(round(cfg.ic.t_final / cfg.stepper.dt))

    snap_steps = {}
    for ts in cfg.snapshot_times:
        snap_steps[min(n_steps, int(round(ts / cfg.stepper.dt)))] = ts

    def snapshot_hook(step, t, parts, state):
        if step in snap_steps:
            write_snapshot(parts, t, out / f"snapshot_{snap_steps[step]:g}.csv")

    particles, records = run_n_steps(
        ctx,
        particles,
        cfg.stepper,
        n_steps,
        record_every=cfg.record_every,
        hooks=(snapshot_hook,),
    )
    write_series(records, out / "series.csv")
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbpic", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a config file")
    p_run.add_argument("config", type=Path, help="path to a key = value config file")

    p_disp = sub.add_parser("dispersion", help="solve the two-stream dispersion relation")
    for name in ("k", "v0", "vT", "Te", "Ti"):
        p_disp.add_argument(name, type=float)

    sub.add_parser("list-experiments", help="list the canned experiment names")
    return parser


def main(argv=None) -> int:
    """CLI driver; exit code 0 on success, 1 on config errors, 2 on non-convergence."""
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    if args.command == "list-experiments":
        for name in EXPERIMENT_NAMES:
            print(name)
        return 0

    if args.command == "dispersion":
        try:
            params = DispersionParams.from_temperatures(
                k=args.k, v0=args.v0, vT=args.vT, Te=args.Te, Ti=args.Ti
            )
            root = solve_growth_rate(params)
        except (ValueError,) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        except NoRoot as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(f"omega = {root.real:.10g} {root.imag:+.10g}i")
        print(f"growth rate Im(omega) = {root.imag:.10g}")
        return 0

    # run
    try:
        text = args.config.read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        out = execute_run(cfg)
    except NonConvergence as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return 2
    print(f"run complete: {out / 'series.csv'}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
