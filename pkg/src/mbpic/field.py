"""Periodic stiffness operator and the nonlinear Poisson-Boltzmann solve.

The field equation solved at every step is

    lambda^2 * (K phi)_j + n0_j * exp((phi_j - phi0)/Te_j) - Z * rho_j = 0,

with K the positive-semidefinite second-difference operator
``(K phi)_j = (2 phi_j - phi_{j-1} - phi_{j+1})/dx^2`` on the periodic grid.
Because the rows of K sum to zero, every converged solve satisfies the
discrete neutrality identity
``sum_j dx*n0_j*exp((phi_j-phi0)/Te_j) = Z * sum_j dx*rho_j``.

``lam = 0`` is the quasi-neutral limit, where the equation degenerates to the
pointwise Boltzmann balance solved in closed form by :func:`solve_anvp`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

__all__ = [
    "StiffnessOperator",
    "ElectronModel",
    "SolverConfig",
    "FieldState",
    "NonConvergence",
    "NonPositiveCharge",
    "apply_stiffness",
    "pb_residual",
    "solve_pb",
    "quasineutral_guess",
    "solve_anvp",
]

RHO_CLAMP_REL = 1e-14  # relative floor applied to the deposit inside logarithms


class NonConvergence(RuntimeError):
    """Nonlinear solve ran out of iterations; carries the residual history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class NonPositiveCharge(ValueError):
    """Total deposited charge is not positive; no neutral solution exists."""


@dataclass(frozen=True)
class StiffnessOperator:
    """Matrix-free periodic operator (K phi)_j = (2 phi_j - phi_{j-1} - phi_{j+1})/dx^2."""

    n: int
    dx: float

    def apply(self, phi: np.ndarray) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return (2.0 * phi - np.roll(phi, 1) - np.roll(phi, -1)) / self.dx**2


def apply_stiffness(op: StiffnessOperator, phi: np.ndarray) -> np.ndarray:
    return op.apply(phi)


@dataclass(frozen=True)
class ElectronModel:
    """Boltzmann electrons n_e = n0 * exp((phi - phi0)/Te) plus the ion charge number.

    ``n0`` and ``Te`` may be scalars or node vectors; they broadcast against phi.
    """

    n0: float | np.ndarray = 1.0
    Te: float | np.ndarray = 1.0
    phi0: float = 0.0
    Z: float = 1.0

    def __post_init__(self):
        if np.any(np.asarray(self.n0) <= 0):
            raise ValueError("reference density n0 must be positive")
        if np.any(np.asarray(self.Te) <= 0):
            raise ValueError("electron temperature Te must be positive")
        if not self.Z > 0:
            raise ValueError("ion charge number Z must be positive")

    def electron_density(self, phi: np.ndarray) -> np.ndarray:
        return self.n0 * np.exp((phi - self.phi0) / self.Te)


@dataclass(frozen=True)
class SolverConfig:
    """Nonlinear field-solve settings; ``lam`` is the quasi-neutrality scale."""

    lam: float = 1.0
    tol: float = 1e-12
    max_iters: int = 200
    method: str = "newton"  # or "picard"

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.method not in ("newton", "picard"):
            raise ValueError(f"unknown solve method {self.method!r}")


@dataclass
class FieldState:
    """Potential vector plus the iteration count and residual of its solve."""

    phi: np.ndarray
    iters: int = 0
    residual_norm: float = 0.0
    history: tuple = ()  # residual sup-norms per iteration, ending at residual_norm


def pb_residual(
    op: StiffnessOperator,
    model: ElectronModel,
    cfg: SolverConfig,
    rho: np.ndarray,
    phi: np.ndarray,
) -> np.ndarray:
    """F(phi) = lam^2*K phi + n0*exp((phi-phi0)/Te) - Z*rho; zero at the solution."""
    phi = np.asarray(phi, dtype=float)
    return cfg.lam**2 * op.apply(phi) + model.electron_density(phi) - model.Z * np.asarray(rho)


def _solve_shifted(op: StiffnessOperator, lam2: float, diag: np.ndarray, rhs: np.ndarray):
    """Direct solve of (lam2*K + diag(d)) x = rhs.

    The matrix is cyclic tridiagonal and symmetric positive definite; it is
    split into a plain tridiagonal part plus a rank-one corner update handled
    by the Sherman-Morrison formula.
    """
    n = op.n
    c = lam2 / op.dx**2
    beta = -c  # periodic corner entries
    ab = np.zeros((2, n))
    ab[0, 1:] = -c
    ab[1] = 2.0 * c + diag
    # shift the two corner-adjacent diagonal entries so T' = M - beta*u*u^T stays SPD
    ab[1, 0] -= beta
    ab[1, -1] -= beta
    if c == 0.0:
        return rhs / ab[1]
    b = np.zeros((n, 2))
    b[:, 0] = rhs
    b[0, 1] = 1.0
    b[-1, 1] = 1.0
    sol = solveh_banded(ab, b)
    y, q = sol[:, 0], sol[:, 1]
    factor = beta * (y[0] + y[-1]) / (1.0 + beta * (q[0] + q[-1]))
    return y - factor * q


def quasineutral_guess(model: ElectronModel, rho: np.ndarray) -> np.ndarray:
    """phi = phi0 + Te*ln(Z*rho/n0), the quasi-neutral initial guess.

    Non-positive deposit values are clamped to a relative floor before the
    logarithm so empty cells at low particle counts stay finite.
    """
    zr = model.Z * np.asarray(rho, dtype=float)
    floor = RHO_CLAMP_REL * max(np.max(zr, initial=0.0), np.finfo(float).tiny)
    zr = np.maximum(zr, floor)
    return np.broadcast_to(
        model.phi0 + model.Te * np.log(zr / model.n0), zr.shape
    ).astype(float)


def solve_anvp(model: ElectronModel, rho: np.ndarray) -> FieldState:
    """Quasi-neutral (lambda = 0) field solve: exact closed form, zero iterations."""
    phi = quasineutral_guess(model, rho)
    res = model.electron_density(phi) - model.Z * np.asarray(rho)
    return FieldState(phi=phi, iters=0, residual_norm=float(np.max(np.abs(res), initial=0.0)))


def solve_pb(
    op: StiffnessOperator,
    model: ElectronModel,
    cfg: SolverConfig,
    rho: np.ndarray,
    warm_phi: np.ndarray | None = None,
) -> FieldState:
    """Solve the discrete Poisson-Boltzmann equation to sup-norm tolerance.

    Newton iterations use the SPD Jacobian ``lam^2*K + diag(n0/Te*exp(.))``
    with a cyclic-tridiagonal direct solve and Armijo backtracking on the
    residual norm.  The Picard mode lags the exponential term and solves the
    constant SPD system ``lam^2*K + diag(n0/Te)`` each sweep.  Warm starts
    come from the caller (previous time step); otherwise the quasi-neutral
    guess is used.
    """
    rho = np.asarray(rho, dtype=float)
    if op.dx * np.sum(model.Z * rho) <= 0.0:
        raise NonPositiveCharge("total deposited charge must be positive")
    if cfg.lam == 0.0:
        return solve_anvp(model, rho)

    phi = np.array(warm_phi, dtype=float) if warm_phi is not None else quasineutral_guess(model, rho)
    lam2 = cfg.lam**2
    te = np.broadcast_to(np.asarray(model.Te, dtype=float), phi.shape)
    history = []

    if cfg.method == "picard":
        d0 = np.broadcast_to(np.asarray(model.n0 / model.Te, dtype=float), phi.shape)
        for it in range(cfg.max_iters):
            res = pb_residual(op, model, cfg, rho, phi)
            rnorm = float(np.max(np.abs(res)))
            history.append(rnorm)
            if rnorm <= cfg.tol:
                return FieldState(phi=phi, iters=it, residual_norm=rnorm, history=tuple(history))
            rhs = model.Z * rho - model.electron_density(phi) + d0 * phi
            phi = _solve_shifted(op, lam2, d0, rhs)
        raise NonConvergence(
            f"Picard iteration did not reach tol={cfg.tol} in {cfg.max_iters} sweeps",
            history,
        )

    for it in range(cfg.max_iters):
        res = pb_residual(op, model, cfg, rho, phi)
        rnorm = float(np.max(np.abs(res)))
        history.append(rnorm)
        if rnorm <= cfg.tol:
            return FieldState(phi=phi, iters=it, residual_norm=rnorm, history=tuple(history))
        diag = model.electron_density(phi) / te
        delta = _solve_shifted(op, lam2, diag, -res)
        step = 1.0
        while step > 1e-8:
            trial = phi + step * delta
            tnorm = np.max(np.abs(pb_residual(op, model, cfg, rho, trial)))
            if tnorm <= (1.0 - 1e-4 * step) * rnorm:
                break
            step *= 0.5
        phi = phi + step * delta
    raise NonConvergence(
        f"Newton iteration did not reach tol={cfg.tol} in {cfg.max_iters} steps",
        history,
    )
