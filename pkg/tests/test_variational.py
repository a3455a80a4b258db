import math

import numpy as np
import pytest

from fraclap import (
    FractionalPolynomial,
    GrowthConstants,
    Nonlinearity,
    NonFiniteSampleError,
    SpectralFunction,
    basis_from_eigenvalues,
    builtin_example_nonlinearity,
    check_coercivity,
    derivative_mismatch,
    energy,
    gradient,
    growth_violations,
    integrate,
    linear_source_nonlinearity,
    minimize,
    minimize_multistart,
    polynomial_nonlinearity,
    project,
    solve_linear,
    synthesize,
    unit_function,
    zero_function,
)

SQRT = FractionalPolynomial(((1.0, 0.5),))


def zero_nonlinearity():
    return polynomial_nonlinearity([0], [0.0])


class TestBuiltinNonlinearity:
    def test_zero_parameters_give_zero_F(self, pi_square):
        nl = builtin_example_nonlinearity(0.0, 0.0, 2)
        u = np.linspace(-2, 2, pi_square.node_count)
        assert np.all(nl.F(pi_square.nodes, u) == 0.0)

    def test_derivative_at_origin(self):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        nodes = np.array([[0.0, 0.0]])
        # cos(0) = 1: dF = 0.5 * 1 * 0 + 0.1 * cos(0) = 0.1
        assert nl.dF(nodes, np.array([0.0]))[0] == pytest.approx(0.1)

    def test_growth_autofill(self):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        g = nl.growth
        assert (g.a, g.c, g.A) == (0.25, 0.5, 0.5)
        assert (g.b, g.d, g.B, g.C) == (0.1, 0.1, 0.1, 0.0)

    def test_growth_bounds_hold_pointwise(self, pi_square):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        worst = growth_violations(nl, pi_square.nodes)
        assert all(v <= 1e-12 for v in worst.values())

    def test_derivative_consistency(self, pi_square, rng):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        u = rng.uniform(-3, 3, pi_square.node_count)
        assert derivative_mismatch(nl, pi_square.nodes, u) <= 1e-4

    def test_dimension_mismatch_rejected(self, pi_interval):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        with pytest.raises(ValueError, match="dimension"):
            nl.F(pi_interval.nodes, np.zeros(pi_interval.node_count))

    def test_callable_b_requires_no_growth(self, pi_square):
        nl = builtin_example_nonlinearity(0.2, lambda nodes: np.cos(nodes[:, 0]), 2)
        assert nl.growth is None
        vals = nl.dF(pi_square.nodes, np.zeros(pi_square.node_count))
        np.testing.assert_allclose(vals, np.cos(pi_square.nodes[:, 0]))


class TestEnergy:
    def test_zero_everything(self, square_basis25):
        assert energy(zero_function(square_basis25), zero_nonlinearity(), SQRT) == 0.0

    def test_pure_quadratic_ground_mode(self, square_basis25):
        # 1/2 * w(lambda_1)^2 = 1/2 * lambda_1 = 1
        u = unit_function(square_basis25, 0)
        assert energy(u, zero_nonlinearity(), SQRT) == pytest.approx(1.0, abs=1e-14)

    def test_linear_term_against_quadrature(self, square_basis25):
        # F(x, u) = u: energy = 1 - int e_1 dx, by direct quadrature
        nl = polynomial_nonlinearity([1], [1.0])
        u = unit_function(square_basis25, 0)
        direct = integrate(square_basis25.domain, synthesize(u))
        assert energy(u, nl, SQRT) == pytest.approx(1.0 - direct, abs=1e-12)

    def test_non_finite_F_reports_node(self, square_basis25):
        def bad_F(nodes, u):
            out = np.zeros(nodes.shape[0])
            out[3] = np.inf
            return out

        nl = Nonlinearity(F=bad_F, dF=lambda nodes, u: np.zeros(nodes.shape[0]))
        with pytest.raises(NonFiniteSampleError) as err:
            energy(zero_function(square_basis25), nl, SQRT)
        assert err.value.node_index == 3


class TestGradient:
    def test_pure_quadratic_ground_mode(self, square_basis25):
        g = gradient(unit_function(square_basis25, 0), zero_nonlinearity(), SQRT)
        np.testing.assert_allclose(g, np.r_[2.0, np.zeros(24)], atol=1e-14)

    def test_linear_source_at_zero(self, square_basis25, rng):
        # F(x,u) = g(x) u: gradient at u = 0 is -<g, e_j>
        gs = np.cos(square_basis25.domain.nodes[:, 0])
        nl = linear_source_nonlinearity(gs)
        grad = gradient(zero_function(square_basis25), nl, SQRT)
        expected = -project(square_basis25, gs).coeffs
        np.testing.assert_allclose(grad, expected, atol=1e-13)

    def test_finite_difference_oracle(self, square_basis25, rng):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        u = SpectralFunction(square_basis25, rng.standard_normal(25))
        g = gradient(u, nl, SQRT)
        for _ in range(5):
            j = int(rng.integers(0, 25))
            h = 1e-6 * (1.0 + abs(u.coeffs[j]))
            step = np.zeros(25)
            step[j] = h
            up = SpectralFunction(square_basis25, u.coeffs + step)
            um = SpectralFunction(square_basis25, u.coeffs - step)
            fd = (energy(up, nl, SQRT) - energy(um, nl, SQRT)) / (2 * h)
            assert fd == pytest.approx(g[j], rel=1e-5, abs=1e-8)


class TestCoercivity:
    def test_square_domain_margin(self, square_basis25):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        chk = check_coercivity(nl, SQRT, square_basis25)
        assert chk.ok
        assert chk.margin == pytest.approx(0.5)
        assert chk.threshold == pytest.approx(1.0)

    def test_supercritical_A_fails(self, square_basis25):
        nl = builtin_example_nonlinearity(1.5, 0.1, 2)
        chk = check_coercivity(nl, SQRT, square_basis25)
        assert not chk.ok

    def test_small_eigenvalue_threshold(self, pi_interval):
        # lambda_1 = 0.5, beta_k = 1: M = 4, threshold alpha_k^2 / 4
        basis = basis_from_eigenvalues(pi_interval, [0.5, 2.0])
        w = FractionalPolynomial(((2.0, 1.0),))
        nl = builtin_example_nonlinearity(0.5, 0.0, 1)
        chk = check_coercivity(nl, w, basis)
        assert chk.threshold == pytest.approx(4.0 / 4.0)

    def test_undeclared_growth_rejected(self, square_basis25):
        nl = Nonlinearity(F=lambda n, u: np.zeros(n.shape[0]),
                          dF=lambda n, u: np.zeros(n.shape[0]))
        with pytest.raises(ValueError):
            check_coercivity(nl, SQRT, square_basis25)


class TestMinimize:
    def test_zero_nonlinearity_stays_at_origin(self, square_basis25):
        rep = minimize(zero_nonlinearity(), SQRT, square_basis25)
        assert rep.converged
        assert rep.iterations <= 1
        assert rep.energy == 0.0
        assert np.all(rep.solution.coeffs == 0.0)

    def test_linear_source_matches_direct_solve(self, square_basis25, rng):
        nodes = square_basis25.domain.nodes
        gs = np.sin(nodes[:, 0]) * np.cos(2 * nodes[:, 1]) + 0.3
        rep = minimize(linear_source_nonlinearity(gs), SQRT, square_basis25)
        direct = solve_linear(project(square_basis25, gs), SQRT).solution
        assert rep.converged
        assert np.max(np.abs(rep.solution.coeffs - direct.coeffs)) <= 1e-6

    def test_model_problem_converges(self, square_basis25):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        rep = minimize(nl, SQRT, square_basis25)
        assert rep.converged
        assert rep.euler_lagrange_residual <= 1e-6
        assert rep.coercivity_margin == pytest.approx(0.5)

    def test_restart_reaches_same_energy(self, square_basis25, rng):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        ref = minimize(nl, SQRT, square_basis25)
        u0 = SpectralFunction(square_basis25, rng.standard_normal(25))
        again = minimize(nl, SQRT, square_basis25, u0=u0)
        assert abs(again.energy - ref.energy) <= 1e-8

    def test_descent_is_monotone(self, square_basis25):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        rep = minimize(nl, SQRT, square_basis25, record_trace=True)
        energies = [row[1] for row in rep.trace]
        assert all(e2 <= e1 + 1e-14 for e1, e2 in zip(energies, energies[1:]))

    def test_noncoercive_raises_without_flag(self, square_basis25):
        nl = builtin_example_nonlinearity(1.5, 0.1, 2)
        with pytest.raises(ValueError, match="coercivity"):
            minimize(nl, SQRT, square_basis25)

    def test_noncoercive_warns_with_flag(self, square_basis25):
        nl = builtin_example_nonlinearity(1.5, 0.1, 2)
        with pytest.warns(UserWarning, match="coercivity"):
            minimize(nl, SQRT, square_basis25, allow_noncoercive=True,
                     max_iters=50)

    def test_undeclared_growth_warns(self, square_basis25):
        nl = Nonlinearity(F=lambda n, u: np.zeros(n.shape[0]),
                          dF=lambda n, u: np.zeros(n.shape[0]))
        with pytest.warns(UserWarning, match="growth"):
            rep = minimize(nl, SQRT, square_basis25)
        assert math.isnan(rep.coercivity_margin)

    def test_max_iters_reports_unconverged(self, square_basis25):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        u0 = SpectralFunction(square_basis25, 10.0 * np.ones(25))
        rep = minimize(nl, SQRT, square_basis25, u0=u0, max_iters=1)
        assert not rep.converged
        assert rep.status == "max_iters"

    def test_energy_grows_along_rays(self, square_basis25, rng):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        for _ in range(3):
            u = rng.standard_normal(25)
            es = [energy(SpectralFunction(square_basis25, t * u), nl, SQRT)
                  for t in (1.0, 2.0, 4.0, 8.0, 16.0)]
            assert es[-1] > es[0]


class TestMultistart:
    def test_energies_agree_for_convex_case(self, square_basis25):
        nl = builtin_example_nonlinearity(0.5, 0.1, 2)
        reps = minimize_multistart(nl, SQRT, square_basis25, starts=4, seed=11)
        assert len(reps) == 4
        assert all(r.converged for r in reps)
        energies = [r.energy for r in reps]
        assert max(energies) - min(energies) <= 1e-8

    def test_first_start_is_origin(self, square_basis25):
        reps = minimize_multistart(zero_nonlinearity(), SQRT, square_basis25,
                                   starts=2, seed=0)
        assert reps[0].iterations <= 1


class TestPolynomialNonlinearity:
    def test_quadratic_growth_autofill(self):
        nl = polynomial_nonlinearity([0, 2], [0.5, 0.3])
        g = nl.growth
        assert (g.a, g.A, g.b, g.C) == (0.3, 0.6, 0.5, 0.5)

    def test_negative_quadratic_term_is_not_coercivity_relevant(self):
        # F = -0.3 u^2 is bounded above by 0, so the upper-growth A is 0
        nl = polynomial_nonlinearity([2], [-0.3])
        assert nl.growth.A == 0.0
        assert nl.growth.a == pytest.approx(0.3)

    def test_cubic_has_no_autofill(self):
        nl = polynomial_nonlinearity([3], [1.0])
        assert nl.growth is None

    def test_explicit_growth_respected(self):
        g = GrowthConstants(a=1, b=2, c=3, d=4, A=5, B=6, C=7)
        nl = polynomial_nonlinearity([3], [1.0], growth=g)
        assert nl.growth == g

    def test_derivative_consistency(self, pi_square, rng):
        c1 = np.sin(pi_square.nodes[:, 0])
        nl = polynomial_nonlinearity([0, 1, 2], [0.2, c1, 0.05])
        u = rng.uniform(-2, 2, pi_square.node_count)
        assert derivative_mismatch(nl, pi_square.nodes, u) <= 1e-4
