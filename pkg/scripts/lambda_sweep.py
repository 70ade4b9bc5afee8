#!/usr/bin/env python3
"""Quasi-neutral limit check: field solves at decreasing lambda vs the closed form.

Prints the sup-norm distance between the screened Poisson-Boltzmann solution
and the quasi-neutral (lambda = 0) solution on a fixed smooth deposit.
"""

import sys

import numpy as np

from mbpic.field import ElectronModel, SolverConfig, StiffnessOperator, solve_anvp, solve_pb


def main():
    n, length = 64, 2 * np.pi
    dx = length / n
    op = StiffnessOperator(n=n, dx=dx)
    model = ElectronModel()
    rho = 1.0 + 0.1 * np.cos(np.arange(n) * dx)
    limit = solve_anvp(model, rho).phi
    print(f"{'lambda':>10s} {'sup|phi - phi_qn|':>20s} {'iters':>6s}")
    for lam in (1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 0.001):
        state = solve_pb(op, model, SolverConfig(lam=lam), rho)
        print(f"{lam:10.3g} {np.max(np.abs(state.phi - limit)):20.6e} {state.iters:6d}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
