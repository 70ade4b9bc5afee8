"""Finite-element field backend with delta-function particles.

The potential lives in a periodic uniform B-spline space (hat functions by
default) and the field equation is solved in weak form with per-cell
Gauss-Legendre quadrature:

    lam^2*(M phi)_i + sum_q w_q n0(x_q) exp((phi_h(x_q)-phi0)/Te) Lambda_i(x_q)
        = Z sum_k w_k Lambda_i(x_k)         for all i,

where M_ij = integral of Lambda_i' Lambda_j'.  Summing the system over i uses
the partition of unity, so the converged solve satisfies neutrality in the
weak sense: sum_q w_q n_e(x_q) = Z sum_k w_k.

Even-degree bases are centered on cell midpoints so every polynomial
breakpoint falls on a cell boundary; that keeps the quadrature (degree+1
points per cell) exact and the stiffness rows summing to zero at roundoff.
"""

from __future__ import annotations

import numpy as np

from .field import FieldState, NonConvergence, NonPositiveCharge
from .mesh import Grid1D, ParticleEnsemble, _stencil_raw

__all__ = ["FemSpace", "assemble_stiffness", "solve_pb_weak", "fem_force", "fem_hamiltonian", "FemContext"]


class FemSpace:
    """Periodic uniform B-spline finite-element space on a Grid1D.

    Attributes
    ----------
    grid : Grid1D
    degree : int
        Polynomial degree of the basis (1 = hats).
    quad_x, quad_w : ndarray
        Global quadrature points/weights, ``degree + 1`` Gauss points per cell.
    """

    def __init__(self, grid: Grid1D, degree: int = 1):
        if degree not in (1, 2, 3):
            raise ValueError("FEM basis degree must be 1, 2 or 3")
        self.grid = grid
        self.degree = degree
        self.n_basis = grid.n_cells
        self.h = grid.dx
        # basis centering offset in cell units: even degrees sit on midpoints
        self._offset = 0.5 if degree % 2 == 0 else 0.0

        nodes, weights = np.polynomial.legendre.leggauss(degree + 1)
        cells = grid.nodes()
        self.quad_x = (cells[:, None] + 0.5 * self.h * (nodes[None, :] + 1.0)).ravel()
        self.quad_w = np.tile(0.5 * self.h * weights, grid.n_cells)
        # dense basis-evaluation matrices at the quadrature points
        self._bq = self._eval_matrix(self.quad_x, derivative=False)
        self._bq_prime = self._eval_matrix(self.quad_x, derivative=True)

    def basis_stencil(self, x: np.ndarray):
        """(indices, values, derivatives) of the nonzero basis functions at x."""
        u = np.asarray(x, dtype=float) / self.h - self._offset
        J, B, dB = _stencil_raw(u, self.degree)
        # dB holds B'(j - u); the basis derivative d/dx Lambda_j needs the
        # opposite sign and the 1/h chain factor
        return np.mod(J, self.n_basis), B, -dB / self.h

    def _eval_matrix(self, x: np.ndarray, derivative: bool) -> np.ndarray:
        J, B, dB = self.basis_stencil(x)
        out = np.zeros((x.size, self.n_basis))
        rows = np.arange(x.size)
        vals = dB if derivative else B
        for m in range(J.shape[0]):
            np.add.at(out, (rows, J[m]), vals[m])
        return out

    def evaluate(self, coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
        """phi_h(x) = sum_i Lambda_i(x) coeffs_i."""
        J, B, _ = self.basis_stencil(np.asarray(x, dtype=float))
        coeffs = np.asarray(coeffs, dtype=float)
        return sum(B[m] * coeffs[J[m]] for m in range(J.shape[0]))

    def particle_load(self, particles: ParticleEnsemble, charge_number: float) -> np.ndarray:
        """b_i = Z * sum_k w_k Lambda_i(x_k)."""
        if particles.count == 0:
            return np.zeros(self.n_basis)
        J, B, _ = self.basis_stencil(particles.positions)
        return charge_number * np.bincount(
            J.ravel(), weights=(particles.weights * B).ravel(), minlength=self.n_basis
        )


def assemble_stiffness(space: FemSpace) -> np.ndarray:
    """M_ij = integral Lambda_i' Lambda_j' dx (exact via the cellwise Gauss rule)."""
    bp = space._bq_prime
    return bp.T @ (space.quad_w[:, None] * bp)


def _scalar(value, name):
    arr = np.asarray(value)
    if arr.ndim != 0:
        raise ValueError(f"FEM backend expects scalar {name} (constant fields)")
    return float(arr)


def _weak_residual(space, stiffness, model, cfg, load, phi):
    te = _scalar(model.Te, "Te")
    n0 = _scalar(model.n0, "n0")
    phi_q = space._bq @ phi
    ne_q = n0 * np.exp((phi_q - model.phi0) / te)
    return cfg.lam**2 * (stiffness @ phi) + space._bq.T @ (space.quad_w * ne_q) - load


def solve_pb_weak(
    space: FemSpace,
    stiffness: np.ndarray,
    model,
    cfg,
    particles: ParticleEnsemble,
    warm_phi: np.ndarray | None = None,
) -> FieldState:
    """Newton solve of the weak Poisson-Boltzmann system to sup-norm tol."""
    te = _scalar(model.Te, "Te")
    n0 = _scalar(model.n0, "n0")
    load = space.particle_load(particles, model.Z)
    if np.sum(load) <= 0.0:
        raise NonPositiveCharge("total particle charge must be positive")

    if warm_phi is not None:
        phi = np.array(warm_phi, dtype=float)
    else:
        # lumped quasi-neutral guess: nodal density estimate b/(Z h)
        dens = np.maximum(load / (model.Z * space.h), 1e-14 * np.max(load / space.h))
        phi = model.phi0 + te * np.log(model.Z * dens / n0)

    history = []
    for it in range(cfg.max_iters):
        res = _weak_residual(space, stiffness, model, cfg, load, phi)
        rnorm = float(np.max(np.abs(res)))
        history.append(rnorm)
        if rnorm <= cfg.tol:
            return FieldState(phi=phi, iters=it, residual_norm=rnorm, history=tuple(history))
        phi_q = space._bq @ phi
        c_q = space.quad_w * (n0 / te) * np.exp((phi_q - model.phi0) / te)
        jac = cfg.lam**2 * stiffness + space._bq.T @ (c_q[:, None] * space._bq)
        delta = np.linalg.solve(jac, -res)
        step = 1.0
        while step > 1e-8:
            tnorm = np.max(
                np.abs(_weak_residual(space, stiffness, model, cfg, load, phi + step * delta))
            )
            if tnorm <= (1.0 - 1e-4 * step) * rnorm:
                break
            step *= 0.5
        phi = phi + step * delta
    raise NonConvergence(
        f"weak Poisson-Boltzmann solve did not reach tol={cfg.tol}", history
    )


def fem_force(space: FemSpace, particles: ParticleEnsemble, phi: np.ndarray, charge_number: float) -> np.ndarray:
    """a_k = -Z * sum_i Lambda_i'(x_k) phi_i = -Z * d/dx phi_h(x_k)."""
    if particles.count == 0:
        return np.zeros(0)
    J, _, dL = space.basis_stencil(particles.positions)
    phi = np.asarray(phi, dtype=float)
    return -charge_number * sum(dL[m] * phi[J[m]] for m in range(J.shape[0]))


def fem_hamiltonian(space: FemSpace, stiffness: np.ndarray, model, particles, phi, lam: float = 1.0) -> float:
    """H = kinetic - lam^2/2 phi^T M phi + Z sum w_k phi_h(x_k) - quad(Te n_e)."""
    te = _scalar(model.Te, "Te")
    n0 = _scalar(model.n0, "n0")
    phi = np.asarray(phi, dtype=float)
    kinetic = 0.5 * float(np.sum(particles.weights * particles.velocities**2))
    electric = 0.5 * lam**2 * float(phi @ (stiffness @ phi))
    coupling = model.Z * float(np.sum(particles.weights * space.evaluate(phi, particles.positions)))
    phi_q = space._bq @ phi
    boltzmann = float(np.sum(space.quad_w * te * n0 * np.exp((phi_q - model.phi0) / te)))
    return kinetic - electric + coupling - boltzmann


class FemContext:
    """Drop-in field backend for the steppers, mirroring HamiltonianContext."""

    def __init__(self, space: FemSpace, model, solver):
        self.space = space
        self.model = model
        self.solver = solver
        self.stiffness = assemble_stiffness(space)

    @property
    def grid(self) -> Grid1D:
        return self.space.grid

    @property
    def length(self) -> float:
        return self.space.grid.length

    @property
    def smoothness_degree(self) -> int:
        return self.space.degree

    def solve_field(self, particles, warm_phi=None) -> FieldState:
        return solve_pb_weak(self.space, self.stiffness, self.model, self.solver, particles, warm_phi)

    def acceleration(self, particles, phi) -> np.ndarray:
        return fem_force(self.space, particles, phi, self.model.Z)

    def energy_terms(self, particles, phi):
        te = _scalar(self.model.Te, "Te")
        n0 = _scalar(self.model.n0, "n0")
        phi = np.asarray(phi, dtype=float)
        kinetic = 0.5 * float(np.sum(particles.weights * particles.velocities**2))
        electric = 0.5 * self.solver.lam**2 * float(phi @ (self.stiffness @ phi))
        coupling = self.model.Z * float(
            np.sum(particles.weights * self.space.evaluate(phi, particles.positions))
        )
        phi_q = self.space._bq @ phi
        boltzmann = float(
            np.sum(self.space.quad_w * te * n0 * np.exp((phi_q - self.model.phi0) / te))
        )
        return kinetic, electric, coupling, boltzmann

    def hamiltonian(self, particles, phi) -> float:
        kinetic, electric, coupling, boltzmann = self.energy_terms(particles, phi)
        return kinetic - electric + coupling - boltzmann

    def neutrality_residual(self, particles, phi) -> float:
        """Weak neutrality: quad(n_e) - Z * sum_k w_k."""
        te = _scalar(self.model.Te, "Te")
        n0 = _scalar(self.model.n0, "n0")
        phi_q = self.space._bq @ np.asarray(phi, dtype=float)
        ne = float(np.sum(self.space.quad_w * n0 * np.exp((phi_q - self.model.phi0) / te)))
        return ne - self.model.Z * float(np.sum(particles.weights))

    def field_residual_norm(self, particles, phi) -> float:
        load = self.space.particle_load(particles, self.model.Z)
        res = _weak_residual(self.space, self.stiffness, self.model, self.solver, load, np.asarray(phi, dtype=float))
        return float(np.max(np.abs(res)))

    def grad_x_hamiltonian(self, particles, state: FieldState) -> np.ndarray:
        from .dynamics import StalePotential

        rnorm = self.field_residual_norm(particles, state.phi)
        if rnorm > 100.0 * self.solver.tol:
            raise StalePotential(
                f"weak residual {rnorm:.3e} exceeds 100*tol={100 * self.solver.tol:.3e}"
            )
        return -particles.weights * self.acceleration(particles, state.phi)

    def grad_v_hamiltonian(self, particles) -> np.ndarray:
        return particles.weights * particles.velocities
