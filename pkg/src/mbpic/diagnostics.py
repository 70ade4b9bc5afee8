"""Conserved-quantity and observable computation over particle/field snapshots.

All functions are pure and read-only; :func:`make_record` bundles one full
per-step diagnostics row.  The energy identity
``H_total = kinetic - electric + coupling - boltzmann`` holds for every record
by construction and is asserted in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Grid1D, ParticleEnsemble

__all__ = [
    "DiagnosticsRecord",
    "EmptyEnsemble",
    "energy_breakdown",
    "particle_moments",
    "neutrality_residual",
    "field_mode_amplitude",
    "phase_space_histogram",
    "make_record",
]

N_MODES = 4  # Fourier mode amplitudes reported per record


class EmptyEnsemble(ValueError):
    """Moments of an ensemble with zero total weight are undefined."""


@dataclass
class DiagnosticsRecord:
    """One diagnostics row; serialized as a single CSV line by the run I/O."""

    t: float
    H_total: float
    H_err_rel: float
    kinetic: float
    electric: float
    coupling: float
    boltzmann: float
    momentum: float
    momentum_err: float
    neutrality_err: float
    temperature: float
    mode_amp: tuple
    pb_iters: int = 0
    dg_iters: int = 0


def energy_breakdown(ctx, particles: ParticleEnsemble, phi: np.ndarray):
    """(kinetic, electric, coupling, boltzmann, total) for the given state."""
    kinetic, electric, coupling, boltzmann = ctx.energy_terms(particles, phi)
    return kinetic, electric, coupling, boltzmann, kinetic - electric + coupling - boltzmann


def particle_moments(particles: ParticleEnsemble):
    """Weighted momentum, mean velocity and temperature T = <(v - u)^2>.

    With this definition a Maxwellian ``exp(-v^2/vT^2)`` has ``T = vT^2/2``.
    """
    wsum = float(np.sum(particles.weights))
    if wsum <= 0.0:
        raise EmptyEnsemble("ensemble has no weight")
    momentum = float(np.sum(particles.weights * particles.velocities))
    mean_v = momentum / wsum
    temperature = float(
        np.sum(particles.weights * (particles.velocities - mean_v) ** 2) / wsum
    )
    return momentum, mean_v, temperature


def neutrality_residual(ctx, particles: ParticleEnsemble, phi: np.ndarray) -> float:
    """Total electron minus ion charge; bounded by ~tol*L after a converged solve."""
    return ctx.neutrality_residual(particles, phi)


def field_mode_amplitude(grid: Grid1D, phi: np.ndarray, mode: int) -> float:
    """|phi_hat_m| * dx with the plain DFT sum over nodes.

    Direct summation: the experiments use at most a few modes and N <= 256.
    """
    if not 0 <= mode <= grid.n_cells // 2:
        raise ValueError(f"mode must lie in [0, N/2], got {mode}")
    j = np.arange(grid.n_cells)
    phase = np.exp(-2j * np.pi * mode * j / grid.n_cells)
    return grid.dx * abs(np.sum(np.asarray(phi) * phase))


def phase_space_histogram(
    particles: ParticleEnsemble,
    x_bins: int,
    v_bins: int,
    x_range,
    v_range,
):
    """Weighted 2D histogram over (x, v); returns (counts, x_edges, v_edges)."""
    if x_bins < 1 or v_bins < 1:
        raise ValueError("bin counts must be >= 1")
    counts, xe, ve = np.histogram2d(
        particles.positions,
        particles.velocities,
        bins=[x_bins, v_bins],
        range=[list(x_range), list(v_range)],
        weights=particles.weights,
    )
    return counts, xe, ve


def make_record(
    ctx,
    particles: ParticleEnsemble,
    field_state,
    t: float,
    h0: float | None = None,
    p0: float | None = None,
    pb_iters: int = 0,
    dg_iters: int = 0,
) -> DiagnosticsRecord:
    """Assemble the full diagnostics row for the current state.

    ``h0``/``p0`` are the t=0 baselines; when omitted (initial record) the
    relative errors are zero by definition.
    """
    deposit_fn = getattr(ctx, "deposit", None)
    if deposit_fn is not None:  # grid backend: share one deposit across the row
        rho = deposit_fn(particles)
        kinetic, electric, coupling, boltzmann = ctx.energy_terms(particles, field_state.phi, rho=rho)
        neutrality = ctx.neutrality_residual(particles, field_state.phi, rho=rho)
    else:
        kinetic, electric, coupling, boltzmann = ctx.energy_terms(particles, field_state.phi)
        neutrality = ctx.neutrality_residual(particles, field_state.phi)
    total = kinetic - electric + coupling - boltzmann
    momentum, _, temperature = particle_moments(particles)
    h_err = 0.0 if h0 is None else abs(total - h0) / max(abs(h0), np.finfo(float).tiny)
    p_err = 0.0 if p0 is None else abs(momentum - p0)
    modes = tuple(
        field_mode_amplitude(ctx.grid, field_state.phi, m) for m in range(1, N_MODES + 1)
    )
    return DiagnosticsRecord(
        t=t,
        H_total=total,
        H_err_rel=h_err,
        kinetic=kinetic,
        electric=electric,
        coupling=coupling,
        boltzmann=boltzmann,
        momentum=momentum,
        momentum_err=p_err,
        neutrality_err=neutrality,
        temperature=temperature,
        mode_amp=modes,
        pb_iters=pb_iters,
        dg_iters=dg_iters,
    )
