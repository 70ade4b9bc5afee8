import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbpic.mesh import (
    BSplineShape,
    Grid1D,
    ParticleEnsemble,
    bspline_eval,
    deposit,
    gather_acceleration,
    shape_stencil,
)

from oracles import cox_de_boor, cox_de_boor_derivative, naive_deposit, naive_gather


def make_grid(n=16, length=8.0):
    return Grid1D(n_cells=n, length=length)


class TestBSplineEval:
    def test_hat_function_geometry(self):
        shape = BSplineShape(degree=1, dx=1.0)
        value, deriv = bspline_eval(shape, 0.5)
        assert value == pytest.approx(0.5, abs=1e-15)
        assert deriv == pytest.approx(-1.0, abs=1e-15)

    def test_quadratic_center_value(self):
        # frozen from the Cox-de Boor recursion oracle
        assert cox_de_boor(2, 0.0) == pytest.approx(0.75, abs=1e-12)
        shape = BSplineShape(degree=2, dx=1.0)
        value, deriv = bspline_eval(shape, 0.0)
        assert value == pytest.approx(0.75, abs=1e-15)
        assert deriv == pytest.approx(0.0, abs=1e-15)

    def test_outside_support(self):
        shape = BSplineShape(degree=2, dx=1.0)
        assert bspline_eval(shape, 2.0) == (0.0, 0.0)
        assert bspline_eval(shape, -2.0) == (0.0, 0.0)

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_matches_cox_de_boor_recursion(self, p):
        rng = np.random.default_rng(10 + p)
        dx = 0.37
        shape = BSplineShape(degree=p, dx=dx)
        for xi in rng.uniform(-(p + 2) * dx, (p + 2) * dx, 50):
            value, deriv = bspline_eval(shape, xi)
            assert value == pytest.approx(cox_de_boor(p, xi / dx) / dx, abs=1e-12)
            assert deriv == pytest.approx(
                cox_de_boor_derivative(p, xi / dx) / dx**2, abs=1e-4
            )

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_nonnegative_and_normalized(self, p):
        dx = 0.5
        shape = BSplineShape(degree=p, dx=dx)
        xi = np.linspace(-3 * dx, 3 * dx, 2001)
        values, _ = bspline_eval(shape, xi)
        assert np.all(values >= 0)
        assert np.trapezoid(values, xi) == pytest.approx(1.0, abs=1e-5)


class TestPartitionOfUnity:
    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_sum_over_nodes_is_one(self, p):
        grid = make_grid(13, 5.2)
        shape = BSplineShape(degree=p, dx=grid.dx)
        rng = np.random.default_rng(42)
        xs = rng.uniform(0.0, grid.length, 1000)
        nodes = grid.nodes()
        for x in xs[:50]:  # dense check on a subset
            total = 0.0
            for xj in nodes:
                for image in (-grid.length, 0.0, grid.length):
                    value, _ = bspline_eval(shape, xj - x + image)
                    total += grid.dx * value
            assert abs(total - 1.0) <= 1e-13
        # full sample via the stencil path
        J, S, dS = shape_stencil(grid, shape, xs)
        sums = grid.dx * S.sum(axis=0)
        assert np.max(np.abs(sums - 1.0)) <= 1e-13
        dsums = grid.dx * dS.sum(axis=0)
        assert np.max(np.abs(dsums)) <= 1e-13

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_stencil_matches_pointwise_eval(self, p):
        grid = make_grid(11, 3.3)
        shape = BSplineShape(degree=p, dx=grid.dx)
        rng = np.random.default_rng(7)
        xs = rng.uniform(0.0, grid.length, 40)
        J, S, dS = shape_stencil(grid, shape, xs)
        nodes = grid.nodes()
        for k, x in enumerate(xs):
            for m in range(J.shape[0]):
                xj = nodes[J[m, k]]
                # compare against the closest periodic image
                xi = (xj - x + 0.5 * grid.length) % grid.length - 0.5 * grid.length
                value, deriv = bspline_eval(shape, xi)
                assert S[m, k] == pytest.approx(value, abs=1e-12)
                assert dS[m, k] == pytest.approx(deriv, abs=1e-12)


class TestDeposit:
    def test_single_particle_on_node(self):
        grid = Grid1D(n_cells=8, length=8.0)
        shape = BSplineShape(degree=2, dx=1.0)
        particles = ParticleEnsemble([1.0], [3.0], [0.0])
        rho = deposit(grid, shape, particles)
        expected = np.zeros(8)
        expected[2:5] = [0.125, 0.75, 0.125]  # from the Cox-de Boor oracle at -1, 0, 1
        np.testing.assert_allclose(rho, expected, atol=1e-15)

    def test_empty_ensemble(self):
        grid = make_grid()
        shape = BSplineShape(degree=2, dx=grid.dx)
        particles = ParticleEnsemble(np.empty(0), np.empty(0), np.empty(0))
        assert np.all(deposit(grid, shape, particles) == 0.0)

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_mass_conservation(self, p):
        grid = make_grid(17, 6.1)
        shape = BSplineShape(degree=p, dx=grid.dx)
        rng = np.random.default_rng(3)
        particles = ParticleEnsemble(
            rng.uniform(0.1, 2.0, 200), rng.uniform(0, grid.length, 200), rng.normal(size=200)
        )
        rho = deposit(grid, shape, particles)
        total = grid.dx * rho.sum()
        assert total == pytest.approx(particles.weights.sum(), rel=1e-13)

    def test_matches_naive_double_loop(self):
        grid = make_grid(9, 4.5)
        shape = BSplineShape(degree=2, dx=grid.dx)
        rng = np.random.default_rng(8)
        particles = ParticleEnsemble(
            rng.uniform(0.5, 1.5, 12), rng.uniform(0, grid.length, 12), np.zeros(12)
        )
        rho = deposit(grid, shape, particles)
        ref = naive_deposit(
            grid.nodes(), grid.dx, grid.length, 2, particles.weights, particles.positions
        )
        np.testing.assert_allclose(rho, ref, rtol=1e-12, atol=1e-13)

    def test_periodic_seam_wrap(self):
        grid = make_grid(10, 5.0)
        shape = BSplineShape(degree=2, dx=grid.dx)
        particles = ParticleEnsemble([1.0], [grid.length - 1e-9], [0.0])
        rho = deposit(grid, shape, particles)
        assert rho[0] > 0.5 / grid.dx  # bulk of the mass lands on node 0
        assert rho[-1] > 0.0 and rho[1] > 0.0  # spread across the seam
        assert grid.dx * rho.sum() == pytest.approx(1.0, abs=1e-13)

    @settings(max_examples=25, deadline=None)
    @given(
        x=st.floats(min_value=0.0, max_value=4.999),
        w=st.floats(min_value=1e-3, max_value=10.0),
        p=st.integers(min_value=1, max_value=3),
    )
    def test_mass_conservation_property(self, x, w, p):
        grid = make_grid(10, 5.0)
        shape = BSplineShape(degree=p, dx=grid.dx)
        rho = deposit(grid, shape, ParticleEnsemble([w], [x], [0.0]))
        assert grid.dx * rho.sum() == pytest.approx(w, rel=1e-12)


class TestGather:
    def test_constant_potential_gives_zero(self):
        grid = make_grid(12, 6.0)
        shape = BSplineShape(degree=2, dx=grid.dx)
        rng = np.random.default_rng(0)
        particles = ParticleEnsemble(
            np.ones(30), rng.uniform(0, grid.length, 30), np.zeros(30)
        )
        acc = gather_acceleration(grid, shape, particles, np.full(12, 3.7), 1.0)
        np.testing.assert_allclose(acc, 0.0, atol=1e-13)

    def test_single_unit_vector_potential(self):
        grid = make_grid(10, 5.0)
        shape = BSplineShape(degree=2, dx=grid.dx)
        xk = 2.13
        particles = ParticleEnsemble([1.0], [xk], [0.0])
        j0 = 4
        phi = np.zeros(10)
        phi[j0] = 1.0
        Z = 2.0
        acc = gather_acceleration(grid, shape, particles, phi, Z)
        _, dS = bspline_eval(shape, grid.nodes()[j0] - xk)
        assert acc[0] == pytest.approx(Z * grid.dx * dS, rel=1e-13)

    def test_matches_naive_double_loop(self):
        grid = make_grid(16, 2 * np.pi)
        shape = BSplineShape(degree=2, dx=grid.dx)
        rng = np.random.default_rng(5)
        particles = ParticleEnsemble(
            np.ones(100), rng.uniform(0, grid.length, 100), np.zeros(100)
        )
        phi = np.cos(2 * np.pi * grid.nodes() / grid.length)
        acc = gather_acceleration(grid, shape, particles, phi, 1.0)
        ref = naive_gather(grid.nodes(), grid.dx, grid.length, 2, particles.positions, phi)
        np.testing.assert_allclose(acc, ref, atol=2e-7)  # oracle uses h=1e-7 differences

    @pytest.mark.parametrize("p", [2, 3])
    def test_deposit_gather_adjointness(self, p):
        # d/dx_k [dx * sum_j S(x_j - x_k) psi_j] = -sum_j dx S'(x_j - x_k) psi_j
        grid = make_grid(14, 7.0)
        shape = BSplineShape(degree=p, dx=grid.dx)
        rng = np.random.default_rng(p)
        psi = rng.normal(size=14)
        for xk in rng.uniform(0, grid.length, 10):
            h = 1e-6

            def coupling(x):
                ens = ParticleEnsemble([1.0], [x % grid.length], [0.0])
                return grid.dx * float(deposit(grid, shape, ens) @ psi)

            fd = (coupling(xk + h) - coupling(xk - h)) / (2 * h)
            ens = ParticleEnsemble([1.0], [xk], [0.0])
            gathered = gather_acceleration(grid, shape, ens, psi, 1.0)[0]
            assert fd == pytest.approx(-gathered, rel=1e-6, abs=1e-9)


class TestParticleEnsemble:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ParticleEnsemble([1.0], [0.0, 1.0], [0.0])

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            ParticleEnsemble([-1.0], [0.0], [0.0])

    def test_reduced_folds_positions(self):
        ens = ParticleEnsemble([1.0, 1.0], [-0.5, 7.5], [0.0, 0.0]).reduced(5.0)
        np.testing.assert_allclose(ens.positions, [4.5, 2.5])


class TestGrid:
    def test_rejects_tiny_grid(self):
        with pytest.raises(ValueError):
            Grid1D(n_cells=2, length=1.0)

    def test_nodes_and_dx(self):
        grid = Grid1D(n_cells=4, length=2.0)
        assert grid.dx == pytest.approx(0.5)
        np.testing.assert_allclose(grid.nodes(), [0.0, 0.5, 1.0, 1.5])
