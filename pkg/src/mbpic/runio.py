"""Flat key=value run configuration and CSV serialization of run outputs.

The config format is one ``key = value`` pair per line with ``#`` comments.
When ``experiment`` names one of the canned benchmarks, every other key is an
override of that benchmark's parameters; otherwise the discretization keys
(L, N, dt, t_final, N_p, vT, Te) must be given explicitly.

Series files carry one row per diagnostics record with 17 significant digits,
which round-trips IEEE doubles exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .dynamics import StepperConfig
from .experiments import InitialCondition, InvalidConfig, canned_config
from .field import SolverConfig
from .mesh import ParticleEnsemble

__all__ = [
    "RunConfig",
    "ParseError",
    "ValidationError",
    "parse_config",
    "write_series",
    "write_snapshot",
    "read_series",
    "read_snapshot",
    "SERIES_COLUMNS",
]

SERIES_COLUMNS = (
    "t,H_total,H_err_rel,kinetic,electric,coupling,boltzmann,momentum,"
    "momentum_err,neutrality_err,temperature,mode1,mode2,mode3,mode4,"
    "pb_iters,dg_iters"
)


class ParseError(ValueError):
    pass


class ValidationError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything one simulation run needs: physics, stepping, solver, output."""

    ic: InitialCondition
    stepper: StepperConfig
    solver: SolverConfig
    experiment: str | None = None
    field_backend: str = "fd"
    fem_degree: int = 1
    output_dir: Path = Path("run_out")
    record_every: int = 1
    snapshot_times: tuple = ()


_IC_KEYS = {
    "kind": str,
    "vT": float,
    "v0": float,
    "alpha": float,
    "k_pert": float,
    "Te": float,
    "n0": float,
    "L": float,
    "N": int,
    "degree": int,
    "dt": float,
    "t_final": float,
    "N_p": int,
    "seed": int,
    "sampler": str,
}
_STEPPER_KEYS = {"scheme": str, "dg_tol": float, "dg_max_iters": int, "dc_guard": float}
_SOLVER_KEYS = {"lambda": float, "tol": float, "max_iters": int, "method": str}
_RUN_KEYS = {
    "experiment": str,
    "field_backend": str,
    "fem_degree": int,
    "output_dir": str,
    "record_every": int,
    "snapshot_times": str,
}
_REQUIRED_CUSTOM = ("L", "N", "dt", "t_final", "N_p", "vT", "Te")


def _parse_pairs(text: str) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in {**_IC_KEYS, **_STEPPER_KEYS, **_SOLVER_KEYS, **_RUN_KEYS}:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        try:
            caster = {**_IC_KEYS, **_STEPPER_KEYS, **_SOLVER_KEYS, **_RUN_KEYS}[key]
            pairs[key] = caster(value)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return pairs


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a run configuration."""
    pairs = _parse_pairs(text)

    experiment = pairs.pop("experiment", None)
    try:
        if experiment is not None:
            ic, stepper, solver = canned_config(experiment)
        else:
            missing = [k for k in _REQUIRED_CUSTOM if k not in pairs]
            if missing:
                raise ValidationError(
                    "no experiment named; missing required keys: " + ", ".join(missing)
                )
            ic = InitialCondition()
            stepper = StepperConfig(dt=1.0)
            solver = SolverConfig()

        ic_over = {k: v for k, v in pairs.items() if k in _IC_KEYS}
        if ic_over:
            ic = replace(ic, **ic_over)
        st_over = {k: v for k, v in pairs.items() if k in _STEPPER_KEYS}
        stepper = replace(stepper, dt=ic.dt, **st_over)
        so_over = {
            ("lam" if k == "lambda" else k): v
            for k, v in pairs.items()
            if k in _SOLVER_KEYS
        }
        if so_over:
            solver = replace(solver, **so_over)
    except (InvalidConfig, ValueError) as exc:
        if isinstance(exc, (ParseError, ValidationError)):
            raise
        raise ValidationError(str(exc)) from exc

    backend = pairs.get("field_backend", "fd")
    if backend not in ("fd", "fem"):
        raise ValidationError(f"field_backend must be 'fd' or 'fem', got {backend!r}")
    fem_degree = pairs.get("fem_degree", 1)
    if fem_degree not in (1, 2, 3):
        raise ValidationError("fem_degree must be 1, 2 or 3")
    record_every = pairs.get("record_every", 1)
    if record_every < 1:
        raise ValidationError("record_every must be >= 1")
    snap_raw = pairs.get("snapshot_times", "")
    try:
        snapshot_times = tuple(float(s) for s in snap_raw.split(",") if s.strip())
    except ValueError as exc:
        raise ValidationError(f"bad snapshot_times: {exc}") from exc
    for ts in snapshot_times:
        if not 0.0 <= ts <= ic.t_final:
            raise ValidationError(f"snapshot time {ts} outside [0, t_final]")

    default_dir = f"runs/{experiment or 'custom'}"
    return RunConfig(
        ic=ic,
        stepper=stepper,
        solver=solver,
        experiment=experiment,
        field_backend=backend,
        fem_degree=fem_degree,
        output_dir=Path(pairs.get("output_dir", default_dir)),
        record_every=record_every,
        snapshot_times=snapshot_times,
    )


def _fmt(value) -> str:
    return f"{value:.17g}"


def write_series(records, path) -> None:
    """Write diagnostics records as CSV with the documented 17-column layout."""
    path = Path(path)
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(SERIES_COLUMNS + "\n")
            for rec in records:
                fields = [
                    rec.t,
                    rec.H_total,
                    rec.H_err_rel,
                    rec.kinetic,
                    rec.electric,
                    rec.coupling,
                    rec.boltzmann,
                    rec.momentum,
                    rec.momentum_err,
                    rec.neutrality_err,
                    rec.temperature,
                    *rec.mode_amp,
                    rec.pb_iters,
                    rec.dg_iters,
                ]
                fh.write(",".join(_fmt(v) for v in fields) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write series file {path}: {exc}") from exc


def write_snapshot(particles: ParticleEnsemble, t: float, path) -> None:
    """Write one particle snapshot: '# t = ...' header then x,v,w rows."""
    path = Path(path)
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(f"# t = {_fmt(t)}\n")
            fh.write("x,v,w\n")
            for x, v, w in zip(particles.positions, particles.velocities, particles.weights):
                fh.write(f"{_fmt(x)},{_fmt(v)},{_fmt(w)}\n")
    except OSError as exc:
        raise OSError(f"cannot write snapshot file {path}: {exc}") from exc


def read_series(path) -> dict:
    """Read a series CSV back into a dict of column name -> ndarray."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


def read_snapshot(path):
    """Read a snapshot file back into (t, ParticleEnsemble)."""
    path = Path(path)
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# t ="):
            raise ValueError(f"{path}: missing '# t =' header line")
        t = float(first.split("=", 1)[1])
        fh.readline()  # column header
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if rows:
        data = np.array(rows, dtype=float)
        ens = ParticleEnsemble(data[:, 2], data[:, 0], data[:, 1])
    else:
        ens = ParticleEnsemble(np.empty(0), np.empty(0), np.empty(0))
    return t, ens
