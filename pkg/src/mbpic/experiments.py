"""Initial-condition samplers, the canned benchmark configurations, and rate fits.

Three benchmarks ship with the code:

* ``finite_grid`` -- drifting Maxwellian equilibrium on an under-resolved
  grid; probes numerical heating.
* ``landau`` -- strong Landau damping of an ion wave with hot electrons.
* ``two_stream`` -- counter-streaming ion beams in a warm electron background.

All sampled densities have unit mean, so every marker carries weight L/N_p.
Velocities are Gaussian with standard deviation vT/sqrt(2) about the drift,
matching distributions of the form exp(-(v - v0)^2 / vT^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .dynamics import StepperConfig
from .field import SolverConfig
from .mesh import ParticleEnsemble

__all__ = [
    "InitialCondition",
    "InvalidConfig",
    "UnknownExperiment",
    "InsufficientData",
    "EXPERIMENT_NAMES",
    "sample_initial",
    "canned_config",
    "measure_rate",
]

EXPERIMENT_NAMES = ("finite_grid", "landau", "two_stream")


class InvalidConfig(ValueError):
    pass


class UnknownExperiment(KeyError):
    pass


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class InitialCondition:
    """Full description of an experiment's initial state and discretization."""

    kind: str = "custom"
    vT: float = 1.0
    v0: float = 0.0
    alpha: float = 0.0  # spatial perturbation amplitude
    k_pert: float = 0.0  # spatial perturbation wavenumber
    Te: float = 1.0
    n0: float = 1.0
    L: float = 2.0 * np.pi
    N: int = 32
    degree: int = 2
    dt: float = 0.01
    t_final: float = 1.0
    N_p: int = 10_000
    seed: int = 12345
    sampler: str = "prng"  # or "stratified"

    def __post_init__(self):
        if self.kind not in EXPERIMENT_NAMES + ("custom",):
            raise InvalidConfig(f"unknown initial-condition kind {self.kind!r}")
        for name in ("vT", "Te", "n0", "L", "dt", "t_final"):
            if not getattr(self, name) > 0:
                raise InvalidConfig(f"{name} must be positive")
        if self.N < 3 or self.N_p < 1:
            raise InvalidConfig("N must be >= 3 and N_p >= 1")
        if not 1 <= self.degree <= 3:
            raise InvalidConfig("shape degree must be in 1..3")
        if self.sampler not in ("prng", "stratified"):
            raise InvalidConfig(f"unknown sampler {self.sampler!r}")
        if self.alpha != 0.0:
            if not 0 < abs(self.alpha) < 1:
                raise InvalidConfig("|alpha| must lie in (0, 1)")
            cycles = self.k_pert * self.L / (2.0 * np.pi)
            if abs(cycles - round(cycles)) > 1e-9 or round(cycles) == 0:
                raise InvalidConfig("k_pert must fit an integer number of periods in L")


def _invert_perturbed_cdf(u: np.ndarray, alpha: float, k: float, length: float):
    """Positions with density (1 + alpha*cos(k x))/L via bisection to 1e-12."""
    lo = np.zeros_like(u)
    hi = np.full_like(u, length)
    target = u * length
    # bisection halves the bracket; 60 rounds reach ~1e-18*L
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        cdf = mid + (alpha / k) * np.sin(k * mid)
        lower = cdf < target
        lo = np.where(lower, mid, lo)
        hi = np.where(lower, hi, mid)
    return 0.5 * (lo + hi)


def sample_initial(ic: InitialCondition) -> ParticleEnsemble:
    """Draw the marker ensemble for an initial condition, reproducibly.

    The ``prng`` sampler draws plain pseudo-random variates.  The
    ``stratified`` sampler (quiet start) maps stratified uniforms through the
    inverse CDFs and shuffles the velocity strata against the position strata,
    trading sampling noise for slight long-time correlations.
    """
    rng = np.random.default_rng(ic.seed)
    n = ic.N_p

    if ic.sampler == "stratified":
        ux = (np.arange(n) + rng.random(n)) / n
        uv = (np.arange(n) + rng.random(n)) / n
        uv = uv[rng.permutation(n)]
        v_base = ndtri(uv) * (ic.vT / np.sqrt(2.0))
    else:
        ux = rng.random(n)
        v_base = rng.normal(0.0, ic.vT / np.sqrt(2.0), n)

    if ic.alpha != 0.0:
        x = _invert_perturbed_cdf(ux, ic.alpha, ic.k_pert, ic.L)
    else:
        x = ux * ic.L

    if ic.kind == "two_stream":
        beams = np.where(np.arange(n) % 2 == 0, ic.v0, -ic.v0)
        v = v_base + beams
    else:
        v = v_base + ic.v0

    w = np.full(n, ic.L / n)
    return ParticleEnsemble(w, np.mod(x, ic.L), v)


def canned_config(name: str):
    """Benchmark parameter sets: returns (InitialCondition, StepperConfig, SolverConfig)."""
    if name == "finite_grid":
        ic = InitialCondition(
            kind="finite_grid",
            vT=0.1,
            v0=0.1,
            Te=1.0,
            L=5.0 * np.pi,
            N=33,
            dt=0.005,
            t_final=100.0,
            N_p=100_000,
        )
    elif name == "landau":
        ic = InitialCondition(
            kind="landau",
            vT=1.4142,
            v0=0.0,
            alpha=0.5,
            k_pert=0.5,
            Te=100.0,
            L=4.0 * np.pi,
            N=65,
            dt=0.05,
            t_final=40.0,
            N_p=100_000,
        )
    elif name == "two_stream":
        ic = InitialCondition(
            kind="two_stream",
            vT=0.1,
            v0=0.4,
            k_pert=0.8,  # second Fourier mode of [0, 5*pi]; used when alpha > 0
            Te=10.0,
            L=5.0 * np.pi,
            N=32,
            dt=0.01,
            t_final=40.0,
            N_p=100_000,
        )
    else:
        raise UnknownExperiment(name)
    stepper = StepperConfig(scheme="strang", dt=ic.dt)
    solver = SolverConfig(lam=1.0, tol=1e-12, max_iters=200, method="newton")
    return ic, stepper, solver


def measure_rate(t, amplitude, window, mode: str) -> float:
    """Least-squares exponential rate of an amplitude series over a window.

    For ``mode="growth"`` all in-window samples enter the fit of
    ``log(amplitude)`` against t.  For ``mode="decay"`` the fit runs through
    the interior local maxima of the oscillating signal; if the window holds
    fewer than two such peaks (monotone or constant signals) all samples are
    used instead.
    """
    if mode not in ("decay", "growth"):
        raise ValueError(f"mode must be 'decay' or 'growth', got {mode!r}")
    t = np.asarray(t, dtype=float)
    amplitude = np.asarray(amplitude, dtype=float)
    t0, t1 = window
    mask = (t >= t0) & (t <= t1)
    ts, amps = t[mask], amplitude[mask]
    if ts.size < 2:
        raise InsufficientData("need at least two samples in the fit window")
    if np.any(amps <= 0):
        raise InsufficientData("amplitudes must be positive for a log fit")

    if mode == "decay":
        interior = (amps[1:-1] > amps[:-2]) & (amps[1:-1] > amps[2:])
        if np.count_nonzero(interior) >= 2:
            ts = ts[1:-1][interior]
            amps = amps[1:-1][interior]
    return float(np.polyfit(ts, np.log(amps), 1)[0])
