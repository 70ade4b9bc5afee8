"""Periodic grid, B-spline particle shapes, charge deposition and force gather.

The particle shape is the centered cardinal B-spline of degree ``p``,
normalized so that ``S(xi) = B_p(xi/dx)/dx``.  With that normalization the
nodal sums satisfy ``sum_j dx*S(x_j - x) = 1`` for every ``x`` (partition of
unity), which is what makes charge deposition exactly conservative on the
periodic grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid1D",
    "BSplineShape",
    "ParticleEnsemble",
    "bspline_eval",
    "deposit",
    "gather_acceleration",
    "shape_stencil",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [0, L) with nodes x_j = j*dx, j = 0..N-1."""

    n_cells: int
    length: float

    def __post_init__(self):
        if self.n_cells < 3:
            raise ValueError(f"need at least 3 cells, got {self.n_cells}")
        if not self.length > 0:
            raise ValueError(f"domain length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    def nodes(self) -> np.ndarray:
        return np.arange(self.n_cells) * self.dx


def _cardinal_bspline(p: int, u):
    """Centered cardinal B-spline B_p evaluated at u (supported on |u| < (p+1)/2)."""
    u = np.asarray(u, dtype=float)
    a = np.abs(u)
    if p == 0:
        # half-open convention [-1/2, 1/2) so the integer-shift sum is exactly 1
        return np.where((u >= -0.5) & (u < 0.5), 1.0, 0.0)
    if p == 1:
        return np.maximum(1.0 - a, 0.0)
    if p == 2:
        return np.where(
            a <= 0.5,
            0.75 - a * a,
            np.where(a < 1.5, 0.5 * (1.5 - a) ** 2, 0.0),
        )
    if p == 3:
        return np.where(
            a <= 1.0,
            2.0 / 3.0 - a * a + 0.5 * a**3,
            np.where(a < 2.0, (2.0 - a) ** 3 / 6.0, 0.0),
        )
    raise ValueError(f"unsupported B-spline degree {p}")


def _cardinal_bspline_deriv(p: int, u):
    """B_p'(u) via the two-term recurrence B_p' = B_{p-1}(u+1/2) - B_{p-1}(u-1/2)."""
    if p < 1:
        return np.zeros_like(np.asarray(u, dtype=float))
    u = np.asarray(u, dtype=float)
    return _cardinal_bspline(p - 1, u + 0.5) - _cardinal_bspline(p - 1, u - 0.5)


@dataclass(frozen=True)
class BSplineShape:
    """Particle shape S(xi) = B_p(xi/dx)/dx; support (-(p+1)/2*dx, (p+1)/2*dx)."""

    degree: int
    dx: float

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        if not self.dx > 0:
            raise ValueError("dx must be positive")

    @property
    def support_radius(self) -> float:
        return 0.5 * (self.degree + 1) * self.dx


def bspline_eval(shape: BSplineShape, xi):
    """Evaluate the shape function and its derivative at offset xi.

    Returns ``(S(xi), S'(xi))`` where the derivative is taken with respect to
    the argument of S itself.  Both are zero outside the support.
    """
    u = np.asarray(xi, dtype=float) / shape.dx
    value = _cardinal_bspline(shape.degree, u) / shape.dx
    deriv = _cardinal_bspline_deriv(shape.degree, u) / shape.dx**2
    if np.isscalar(xi):
        return float(value), float(deriv)
    return value, deriv


@dataclass
class ParticleEnsemble:
    """Marker particles: weights w_k >= 0, positions x_k, velocities v_k."""

    weights: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        n = self.weights.size
        if self.positions.size != n or self.velocities.size != n:
            raise ValueError("weights, positions, velocities must have equal length")
        if n and np.any(self.weights < 0):
            raise ValueError("particle weights must be non-negative")

    @property
    def count(self) -> int:
        return self.weights.size

    def reduced(self, length: float) -> "ParticleEnsemble":
        """Copy with positions folded into [0, L)."""
        return ParticleEnsemble(
            self.weights.copy(), np.mod(self.positions, length), self.velocities.copy()
        )


# ---------------------------------------------------------------------------
# stencil machinery (shared by deposition, gather and the FEM basis)


def _stencil_raw(u: np.ndarray, p: int):
    """Nodes and B-spline values touching scaled positions u = x/dx.

    Returns ``(j, B, dB)`` with shape ``(p+1, len(u))``: unwrapped integer node
    indices, ``B_p(j - u)`` and ``B_p'(j - u)``.  Closed forms per degree keep
    this branch-free over the particle arrays.
    """
    if p == 1:
        j0 = np.floor(u)
        f = u - j0
        j0 = j0.astype(np.int64)
        J = np.stack([j0, j0 + 1])
        B = np.stack([1.0 - f, f])
        dB = np.stack([np.ones_like(f), -np.ones_like(f)])
        return J, B, dB
    if p == 2:
        js = np.rint(u)
        f = u - js
        j0 = js.astype(np.int64)
        J = np.stack([j0 - 1, j0, j0 + 1])
        am, ap = 0.5 - f, 0.5 + f
        B = np.stack([0.5 * am * am, 0.75 - f * f, 0.5 * ap * ap])
        dB = np.stack([am, 2.0 * f, -ap])
        return J, B, dB
    if p == 3:
        j0 = np.floor(u)
        f = u - j0
        j0 = j0.astype(np.int64)
        J = np.stack([j0 - 1, j0, j0 + 1, j0 + 2])
        g = 1.0 - f
        B = np.stack(
            [
                g**3 / 6.0,
                2.0 / 3.0 - f * f + 0.5 * f**3,
                2.0 / 3.0 - g * g + 0.5 * g**3,
                f**3 / 6.0,
            ]
        )
        dB = np.stack(
            [
                0.5 * g * g,
                2.0 * f - 1.5 * f * f,
                -2.0 * g + 1.5 * g * g,
                -0.5 * f * f,
            ]
        )
        return J, B, dB
    raise ValueError(f"stencil only implemented for degrees 1..3, got {p}")


def shape_stencil(grid: Grid1D, shape: BSplineShape, positions: np.ndarray):
    """Wrapped node indices and shape values S, S' for each particle.

    Returns arrays of shape ``(p+1, n_particles)``: periodic node indices,
    ``S(x_j - x_k)`` and ``S'(x_j - x_k)``.
    """
    u = np.asarray(positions, dtype=float) / grid.dx
    J, B, dB = _stencil_raw(u, shape.degree)
    return np.mod(J, grid.n_cells), B / grid.dx, dB / grid.dx**2


def deposit(grid: Grid1D, shape: BSplineShape, particles: ParticleEnsemble) -> np.ndarray:
    """Charge deposition rho_j = sum_k w_k S(x_j - x_k), periodic wrap.

    The result satisfies ``sum_j dx*rho_j == sum_k w_k`` up to roundoff.
    """
    if particles.count == 0:
        return np.zeros(grid.n_cells)
    J, S, _ = shape_stencil(grid, shape, particles.positions)
    return np.bincount(
        J.ravel(), weights=(particles.weights * S).ravel(), minlength=grid.n_cells
    )


def gather_acceleration(
    grid: Grid1D,
    shape: BSplineShape,
    particles: ParticleEnsemble,
    phi: np.ndarray,
    charge_number: float = 1.0,
) -> np.ndarray:
    """Acceleration a_k = Z * sum_j dx * S'(x_j - x_k) * phi_j.

    Equals ``Z*E(x_k)`` for the field interpolant built with the same shape,
    which keeps deposition and gather energetically paired.
    """
    if particles.count == 0:
        return np.zeros(0)
    J, _, dS = shape_stencil(grid, shape, particles.positions)
    acc = np.zeros(particles.count)
    phi = np.asarray(phi, dtype=float)
    for m in range(J.shape[0]):
        acc += dS[m] * phi[J[m]]
    return charge_number * grid.dx * acc
