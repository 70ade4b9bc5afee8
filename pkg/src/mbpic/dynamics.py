"""Finite-dimensional Hamiltonian dynamics of the particle-field system.

The marker particles evolve under the Hamiltonian ODE

    dx_k/dt = (1/w_k) dH/dv_k,    dv_k/dt = -(1/w_k) dH/dx_k,

with the potential eliminated through the Poisson-Boltzmann solve at the
current positions.  Two time discretizations are provided: splitting methods
built from the exact drift and kick sub-flows (Lie, Strang, and a 4th-order
triple-jump composition), and the Gonzalez discrete-gradient method, which
conserves the discrete energy exactly up to the fixed-point tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import (
    ElectronModel,
    FieldState,
    NonConvergence,
    SolverConfig,
    StiffnessOperator,
    solve_pb,
)
from .mesh import BSplineShape, Grid1D, ParticleEnsemble, deposit, gather_acceleration

__all__ = [
    "HamiltonianContext",
    "StepperConfig",
    "StepReport",
    "StalePotential",
    "drift_exact",
    "kick_exact",
    "splitting_step",
    "discrete_gradient_step",
    "run_n_steps",
]

# triple-jump composition coefficients (4th order from a symmetric 2nd-order base)
_TJ_GAMMA1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_TJ_GAMMA2 = 1.0 - 2.0 * _TJ_GAMMA1

_SPLITTING_COEFFS = {
    # (kick coefficients, drift coefficients); kicks and drifts alternate,
    # starting and ending with a kick
    "lie": ((1.0, 0.0), (1.0,)),
    "strang": ((0.5, 0.5), (1.0,)),
    "comp4": (
        (
            0.5 * _TJ_GAMMA1,
            0.5 * (_TJ_GAMMA1 + _TJ_GAMMA2),
            0.5 * (_TJ_GAMMA2 + _TJ_GAMMA1),
            0.5 * _TJ_GAMMA1,
        ),
        (_TJ_GAMMA1, _TJ_GAMMA2, _TJ_GAMMA1),
    ),
}


class StalePotential(RuntimeError):
    """Potential passed to a gradient evaluation no longer solves the field equation."""


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping scheme selection and discrete-gradient iteration controls."""

    scheme: str = "strang"  # lie | strang | comp4 | discrete_gradient
    dt: float = 0.01
    dg_tol: float = 1e-12
    dg_max_iters: int = 100
    dc_guard: float | None = None  # None -> 1e-14 * (|X|^2 + |V|^2 + 1)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.scheme not in ("lie", "strang", "comp4", "discrete_gradient"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass
class StepReport:
    """Per-step solver bookkeeping returned alongside the advanced particles."""

    phi_after: FieldState
    pb_iters: int = 0
    dg_iters: int = 0
    dc_value: float = 0.0


@dataclass(frozen=True)
class HamiltonianContext:
    """Everything needed to evaluate H and its gradients for the grid backend."""

    grid: Grid1D
    shape: BSplineShape
    stiffness: StiffnessOperator
    model: ElectronModel
    solver: SolverConfig

    @property
    def length(self) -> float:
        return self.grid.length

    @property
    def smoothness_degree(self) -> int:
        return self.shape.degree

    def deposit(self, particles: ParticleEnsemble) -> np.ndarray:
        return deposit(self.grid, self.shape, particles)

    def solve_field(
        self, particles: ParticleEnsemble, warm_phi: np.ndarray | None = None
    ) -> FieldState:
        return solve_pb(
            self.stiffness, self.model, self.solver, self.deposit(particles), warm_phi
        )

    def acceleration(self, particles: ParticleEnsemble, phi: np.ndarray) -> np.ndarray:
        return gather_acceleration(self.grid, self.shape, particles, phi, self.model.Z)

    def energy_terms(self, particles: ParticleEnsemble, phi: np.ndarray, rho=None):
        """(kinetic, electric, coupling, boltzmann); H = kin - elec + coup - boltz."""
        dx = self.grid.dx
        phi = np.asarray(phi, dtype=float)
        if rho is None:
            rho = self.deposit(particles)
        kinetic = 0.5 * float(np.sum(particles.weights * particles.velocities**2))
        electric = 0.5 * self.solver.lam**2 * dx * float(phi @ self.stiffness.apply(phi))
        coupling = self.model.Z * dx * float(np.sum(rho * phi))
        boltzmann = dx * float(
            np.sum(self.model.Te * self.model.electron_density(phi) * np.ones_like(phi))
        )
        return kinetic, electric, coupling, boltzmann

    def hamiltonian(self, particles: ParticleEnsemble, phi: np.ndarray) -> float:
        kinetic, electric, coupling, boltzmann = self.energy_terms(particles, phi)
        return kinetic - electric + coupling - boltzmann

    def neutrality_residual(self, particles: ParticleEnsemble, phi: np.ndarray, rho=None) -> float:
        """-Z*sum dx*rho + sum dx*n_e(phi); zero after a converged solve."""
        dx = self.grid.dx
        if rho is None:
            rho = self.deposit(particles)
        ne = self.model.electron_density(np.asarray(phi, dtype=float))
        return float(-self.model.Z * dx * np.sum(rho) + dx * np.sum(ne * np.ones_like(rho)))

    def field_residual_norm(self, particles: ParticleEnsemble, phi: np.ndarray) -> float:
        from .field import pb_residual

        res = pb_residual(self.stiffness, self.model, self.solver, self.deposit(particles), phi)
        return float(np.max(np.abs(res)))

    def grad_x_hamiltonian(
        self, particles: ParticleEnsemble, state: FieldState
    ) -> np.ndarray:
        """dH/dx_k = -w_k * a_k, valid only on the field-solution manifold.

        Raises :class:`StalePotential` if the supplied potential's residual at
        the current positions exceeds 100x the solver tolerance.
        """
        rnorm = self.field_residual_norm(particles, state.phi)
        if rnorm > 100.0 * self.solver.tol:
            raise StalePotential(
                f"field residual {rnorm:.3e} exceeds 100*tol={100 * self.solver.tol:.3e}"
            )
        return -particles.weights * self.acceleration(particles, state.phi)

    def grad_v_hamiltonian(self, particles: ParticleEnsemble) -> np.ndarray:
        return particles.weights * particles.velocities


def drift_exact(particles: ParticleEnsemble, dt: float, length: float) -> ParticleEnsemble:
    """Exact free-streaming flow: x <- (x + dt*v) mod L, v unchanged."""
    return ParticleEnsemble(
        particles.weights.copy(),
        np.mod(particles.positions + dt * particles.velocities, length),
        particles.velocities.copy(),
    )


def kick_exact(
    ctx,
    particles: ParticleEnsemble,
    dt: float,
    warm_phi: np.ndarray | None = None,
) -> tuple[ParticleEnsemble, StepReport]:
    """Exact acceleration flow at frozen positions: one field solve, then v += dt*a."""
    state = ctx.solve_field(particles, warm_phi)
    acc = ctx.acceleration(particles, state.phi)
    kicked = ParticleEnsemble(
        particles.weights.copy(), particles.positions.copy(), particles.velocities + dt * acc
    )
    return kicked, StepReport(phi_after=state, pb_iters=state.iters)


def splitting_step(
    ctx,
    particles: ParticleEnsemble,
    cfg: StepperConfig,
    warm_phi: np.ndarray | None = None,
) -> tuple[ParticleEnsemble, StepReport]:
    """One step of the configured splitting scheme (lie, strang or comp4).

    Adjacent kicks from composed Strang stages are merged, so each step does
    ``len(drift coefficients) + 1`` field solves, each warm-started from the
    previous potential.
    """
    kick_coeffs, drift_coeffs = _SPLITTING_COEFFS[cfg.scheme]
    state_phi = warm_phi
    pb_total = 0
    last_state = None
    stale = True
    for i, ck in enumerate(kick_coeffs):
        if ck != 0.0:
            particles, report = kick_exact(ctx, particles, ck * cfg.dt, state_phi)
            state_phi = report.phi_after.phi
            pb_total += report.pb_iters
            last_state = report.phi_after
            stale = False
        if i < len(drift_coeffs):
            particles = drift_exact(particles, drift_coeffs[i] * cfg.dt, ctx.length)
            stale = True
    if stale:  # composition ended with a drift: refresh phi at the final positions
        last_state = ctx.solve_field(particles, state_phi)
        pb_total += last_state.iters
    return particles, StepReport(phi_after=last_state, pb_iters=pb_total)


def discrete_gradient_step(
    ctx,
    particles: ParticleEnsemble,
    cfg: StepperConfig,
    warm_phi: np.ndarray | None = None,
    h_current: float | None = None,
) -> tuple[ParticleEnsemble, StepReport]:
    """One energy-conserving step of the Gonzalez discrete-gradient method.

    The update is implicit; a fixed-point iteration runs until the sup-norm of
    the (X, V) update drops below ``cfg.dg_tol``.  Every sweep solves the field
    equation twice: at the midpoint positions (for the midpoint gradient) and
    at the trial endpoint (for H(z+), needed by the correction coefficient
    d_c).  Positions are kept unreduced during the iteration so the chain-rule
    differences X+ - X are meaningful; the result is reduced modulo L.
    """
    if ctx.smoothness_degree < 2:
        raise ValueError("discrete gradient stepper needs shape/basis degree >= 2")
    w = particles.weights
    if np.any(w <= 0):
        raise ValueError("discrete gradient stepper needs strictly positive weights")
    x0 = particles.positions
    v0 = particles.velocities
    dt = cfg.dt
    length = ctx.length

    pb_start = 0
    if h_current is None:
        state0 = ctx.solve_field(particles, warm_phi)
        h_current = ctx.hamiltonian(particles, state0.phi)
        warm_phi = state0.phi
        pb_start = state0.iters

    guard = cfg.dc_guard
    if guard is None:
        guard = 1e-14 * (float(np.sum(x0 * x0)) + float(np.sum(v0 * v0)) + 1.0)

    # drift predictor
    xp = x0 + dt * v0
    vp = v0.copy()
    phi_mid = warm_phi
    phi_end = warm_phi
    pb_total = pb_start
    dc = 0.0
    prev_update = np.inf
    growth_streak = 0
    converged = False
    for it in range(cfg.dg_max_iters):
        x_mid = 0.5 * (x0 + xp)
        v_mid = 0.5 * (v0 + vp)
        mid = ParticleEnsemble(w, np.mod(x_mid, length), v_mid)
        mid_state = ctx.solve_field(mid, phi_mid)
        phi_mid = mid_state.phi
        pb_total += mid_state.iters
        acc_mid = ctx.acceleration(mid, phi_mid)

        trial = ParticleEnsemble(w, np.mod(xp, length), vp)
        end_state = ctx.solve_field(trial, phi_end)
        phi_end = end_state.phi
        pb_total += end_state.iters
        h_end = ctx.hamiltonian(trial, phi_end)

        dxv = xp - x0
        dvv = vp - v0
        denom = float(np.sum(dxv * dxv) + np.sum(dvv * dvv))
        grad_dot = float(np.sum(-w * acc_mid * dxv) + np.sum(w * v_mid * dvv))
        dc = 0.0 if denom < guard else (h_end - h_current - grad_dot) / denom

        x_new = x0 + dt * (v_mid + dc * dvv / w)
        v_new = v0 + dt * (acc_mid - dc * dxv / w)
        update = max(
            float(np.max(np.abs(x_new - xp), initial=0.0)),
            float(np.max(np.abs(v_new - vp), initial=0.0)),
        )
        if update > prev_update:
            growth_streak += 1
            if growth_streak >= 2:  # rare stall: damp the fixed-point map
                x_new = 0.5 * (x_new + xp)
                v_new = 0.5 * (v_new + vp)
        else:
            growth_streak = 0
        prev_update = update
        xp, vp = x_new, v_new
        if update <= cfg.dg_tol:
            converged = True
            break
    if not converged:
        raise NonConvergence(
            f"discrete-gradient fixed point did not reach {cfg.dg_tol} "
            f"in {cfg.dg_max_iters} iterations (last update {prev_update:.3e})"
        )

    advanced = ParticleEnsemble(w.copy(), np.mod(xp, length), vp)
    final_state = ctx.solve_field(advanced, phi_end)
    pb_total += final_state.iters
    return advanced, StepReport(
        phi_after=final_state, pb_iters=pb_total, dg_iters=it + 1, dc_value=dc
    )


def step_once(
    ctx,
    particles: ParticleEnsemble,
    cfg: StepperConfig,
    warm_phi: np.ndarray | None = None,
    h_current: float | None = None,
) -> tuple[ParticleEnsemble, StepReport]:
    """Dispatch a single step of the configured scheme."""
    if cfg.scheme == "discrete_gradient":
        return discrete_gradient_step(ctx, particles, cfg, warm_phi, h_current)
    return splitting_step(ctx, particles, cfg, warm_phi)


def run_n_steps(
    ctx,
    particles: ParticleEnsemble,
    cfg: StepperConfig,
    n_steps: int,
    record_every: int = 1,
    hooks=(),
    t_start: float = 0.0,
):
    """Advance n steps, recording diagnostics at the requested cadence.

    Returns ``(particles, records)`` where records is a list of
    :class:`~mbpic.diagnostics.DiagnosticsRecord`, starting with the initial
    state (when ``n_steps >= 1``) and then every ``record_every``-th step.
    Hooks are callables ``hook(step_index, t, particles, field_state)`` invoked
    after every step and once for the initial state.
    """
    from .diagnostics import make_record

    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    records = []
    if n_steps == 0:
        return particles, records

    state = ctx.solve_field(particles)
    first = make_record(ctx, particles, state, t_start, pb_iters=state.iters)
    records.append(first)
    for hook in hooks:
        hook(0, t_start, particles, state)
    h0, p0 = first.H_total, first.momentum
    h_current = h0

    needs_h = cfg.scheme == "discrete_gradient"
    for k in range(1, n_steps + 1):
        particles, report = step_once(ctx, particles, cfg, state.phi, h_current)
        state = report.phi_after
        t = t_start + k * cfg.dt
        if k % record_every == 0 or k == n_steps:
            rec = make_record(
                ctx,
                particles,
                state,
                t,
                h0=h0,
                p0=p0,
                pb_iters=report.pb_iters,
                dg_iters=report.dg_iters,
            )
            records.append(rec)
            h_current = rec.H_total
        else:
            h_current = ctx.hamiltonian(particles, state.phi) if needs_h else None
        for hook in hooks:
            hook(k, t, particles, state)
    return particles, records
