"""Linear kinetic theory: plasma dispersion function and two-stream root finding.

The two-stream relation solved here is

    1 + 1/(k^2 le^2) = 1/(2 k^2 li^2) * (Z'((w - k v0)/(k vT)) + Z'((w + k v0)/(k vT)))

with ``le = sqrt(Te)`` and ``li`` the ion screening length.  Roots come in
pairs ``w`` and ``-conj(w)``; the solver returns the representative with the
largest positive imaginary part (the growth rate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import wofz

__all__ = [
    "DispersionParams",
    "NoRoot",
    "plasma_Z",
    "plasma_Z_prime",
    "two_stream_residual",
    "solve_growth_rate",
]


class NoRoot(RuntimeError):
    """No verified root with positive imaginary part was found."""


@dataclass(frozen=True)
class DispersionParams:
    """Wavenumber, beam drift, thermal speed and the two screening lengths."""

    k: float
    v0: float
    vT: float
    lambda_e: float
    lambda_i: float

    def __post_init__(self):
        if self.k == 0:
            raise ValueError("wavenumber k must be nonzero")
        if not self.vT > 0:
            raise ValueError("thermal speed vT must be positive")
        if not (self.lambda_e > 0 and self.lambda_i > 0):
            raise ValueError("screening lengths must be positive")

    @classmethod
    def from_temperatures(cls, k, v0, vT, Te, Ti):
        """Build params from temperatures via lambda_e = sqrt(Te), lambda_i = sqrt(Ti)."""
        return cls(k=k, v0=v0, vT=vT, lambda_e=np.sqrt(Te), lambda_i=np.sqrt(Ti))


def plasma_Z(zeta):
    """Fried-Conte plasma dispersion function Z(zeta) = i*sqrt(pi)*w(zeta).

    The Faddeeva function w continues Z analytically below the real axis
    (Landau contour).
    """
    return 1j * np.sqrt(np.pi) * wofz(zeta)


def plasma_Z_prime(zeta):
    """Z'(zeta) = -2*(1 + zeta*Z(zeta))."""
    return -2.0 * (1.0 + zeta * plasma_Z(zeta))


def _z_second(zeta):
    return -2.0 * (plasma_Z(zeta) + zeta * plasma_Z_prime(zeta))


def two_stream_residual(params: DispersionParams, omega):
    """LHS - RHS of the two-stream dispersion relation; zero at a root."""
    k, v0, vT = params.k, params.v0, params.vT
    zm = (omega - k * v0) / (k * vT)
    zp = (omega + k * v0) / (k * vT)
    lhs = 1.0 + 1.0 / (k**2 * params.lambda_e**2)
    rhs = (plasma_Z_prime(zm) + plasma_Z_prime(zp)) / (2.0 * k**2 * params.lambda_i**2)
    return lhs - rhs


def _residual_derivative(params: DispersionParams, omega):
    k, v0, vT = params.k, params.v0, params.vT
    zm = (omega - k * v0) / (k * vT)
    zp = (omega + k * v0) / (k * vT)
    return -(_z_second(zm) + _z_second(zp)) / (2.0 * k**3 * vT * params.lambda_i**2)


def _newton(params, omega, tol=1e-12, max_iters=100):
    # divergent iterates overflow wofz; the NaN guards below handle them
    with np.errstate(all="ignore"):
        for _ in range(max_iters):
            f = two_stream_residual(params, omega)
            df = _residual_derivative(params, omega)
            if df == 0 or not np.isfinite(df):
                return None
            step = f / df
            omega = omega - step
            if not np.isfinite(omega):
                return None
            if abs(step) < tol:
                return omega
    return None


def solve_growth_rate(params: DispersionParams, guess=None, residual_tol=1e-10):
    """Root of the dispersion relation with the largest growth rate Im(omega) > 0.

    Newton iterations start from ``guess`` (when given) and from a grid of
    initial points covering Re(omega) in [-2 k v0, 2 k v0] and Im(omega) in
    (0, 2 k v0].  Raises :class:`NoRoot` when no verified unstable root exists
    (e.g. v0 = 0 with a stable Maxwellian).
    """
    k, v0 = params.k, abs(params.v0)
    span = 2.0 * abs(k) * v0 if v0 > 0 else 2.0 * abs(k) * params.vT
    starts = []
    if guess is not None:
        starts.append(complex(guess))
    for re in np.linspace(-span, span, 9):
        for im in np.linspace(span / 8.0, span, 8):
            starts.append(complex(re, im))

    best = None
    for s in starts:
        root = _newton(params, s)
        if root is None:
            continue
        if abs(two_stream_residual(params, root)) > residual_tol:
            continue
        if root.imag <= 1e-8:
            continue
        if best is None or root.imag > best.imag:
            best = root
    if best is None:
        raise NoRoot("no unstable root found over the initial-guess grid")
    # return the Im > 0 representative of the (w, -conj(w)) pair
    return best if best.real >= 0 or abs(best.real) < 1e-10 else -best.conjugate()
