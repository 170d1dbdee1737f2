import numpy as np
import pytest
from scipy import linalg

from momentum_margin.core.lifting import (
    QuadraticInstance, RationalFunction, build_lifted_matrix, build_structure, characteristic_polynomial,
    characteristic_polynomials, closed_loop_polynomial, companion_matrix, convolve_numerator,
    equilibrium_state, stack_history, transfer_functions,
)
from momentum_margin.core.method_spec import FunctionClass, MethodSpec, advance, preset
from momentum_margin.core.simulation import make_quadratic

from .conftest import char_poly, matched_distance, random_specs


class TestNumerator:
    def test_heavy_ball(self, heavy_ball):
        np.testing.assert_allclose(convolve_numerator(heavy_ball), [0.25, 0.0])

    def test_nesterov(self, fc_1_9):
        np.testing.assert_allclose(convolve_numerator(preset("nesterov", fc_1_9)), [1 / 6, -1 / 18])

    def test_two_gradients(self):
        spec = MethodSpec(k=2, l=1, alpha=[1.0, 2.0], beta=[0.0, 0.0], gamma=[0.5, 0.5])
        np.testing.assert_allclose(convolve_numerator(spec), [0.5, 1.5, 1.0])

    def test_invalid_spec(self):
        spec = MethodSpec(k=1, l=0, alpha=[0.0], beta=[0.0], gamma=[1.0, 0.0])
        with pytest.raises(ValueError):
            convolve_numerator(spec)


class TestStructure:
    def test_heavy_ball(self, heavy_ball):
        system = build_structure(heavy_ball)
        np.testing.assert_allclose(system.a0, [[0, 1], [-0.25, 1.25]])
        np.testing.assert_allclose(system.b0, [[0], [0.25]])
        assert len(system.c_rows) == 1
        np.testing.assert_array_equal(system.c_rows[0], [0.0, 1.0])
        np.testing.assert_allclose(system.n_coeffs, [0.25, 0.0])
        np.testing.assert_allclose(system.n_matrix, [[0, 0], [0, 0.25]])

    def test_gradient_descent(self, gradient_quarter):
        system = build_structure(gradient_quarter)
        np.testing.assert_array_equal(system.a0, [[0, 1], [0, 1]])
        np.testing.assert_array_equal(system.b0, [[0], [0.25]])

    def test_nesterov_output_row(self, fc_1_9):
        system = build_structure(preset("nesterov", fc_1_9))
        np.testing.assert_allclose(system.c_rows[0], [-0.5, 1.5])

    def test_c_rows_ordering(self):
        spec = MethodSpec(k=3, l=1, alpha=[0.1, 0.2], beta=[0.1, 0.2, 0.3], gamma=[0.7, 0.2, 0.1])
        system = build_structure(spec)
        # rows for j = 1 then j = 0; gamma reversed between the zero pads
        np.testing.assert_allclose(system.c_rows[0], [0.1, 0.2, 0.7, 0.0])
        np.testing.assert_allclose(system.c_rows[1], [0.0, 0.1, 0.2, 0.7])
        np.testing.assert_allclose(system.b0[-1], [0.2, 0.1])

    @pytest.mark.parametrize("spec", random_specs(30, seed=11, max_k=5), ids=lambda s: f"k{s.k}l{s.l}")
    def test_row_sums_and_shapes(self, spec):
        system = build_structure(spec)
        k, l = spec.k, spec.l
        assert system.a0.shape == (k + 1, k + 1)
        assert system.b0.shape == (k + 1, l + 1)
        assert not system.b0[:-1].any()
        np.testing.assert_array_equal(system.a0[:k, 1:], np.eye(k))
        assert system.a0[-1].sum() == pytest.approx(1.0, abs=1e-12)
        for row in system.c_rows:
            assert row.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(system.n_coeffs, np.convolve(spec.alpha, spec.gamma))

    def test_structure_is_read_only(self, heavy_ball):
        system = build_structure(heavy_ball)
        with pytest.raises(ValueError):
            system.a0[0, 0] = 1.0


class TestCompanion:
    def test_heavy_ball_at_m(self, heavy_ball):
        np.testing.assert_allclose(companion_matrix(build_structure(heavy_ball), 1.0), [[0, 1], [-0.25, 1.0]])

    def test_heavy_ball_at_L(self, heavy_ball):
        np.testing.assert_allclose(companion_matrix(build_structure(heavy_ball), 9.0), [[0, 1], [-0.25, -1.0]])

    def test_zero_gain_is_a0(self, fc_1_9):
        system = build_structure(preset("nesterov", fc_1_9))
        np.testing.assert_array_equal(companion_matrix(system, 0.0), system.a0)


class TestCharacteristicPolynomial:
    def test_heavy_ball(self, heavy_ball):
        np.testing.assert_allclose(characteristic_polynomial(build_structure(heavy_ball), 1.0), [1, -1, 0.25])

    def test_gradient_descent(self, gradient_quarter):
        np.testing.assert_allclose(characteristic_polynomial(build_structure(gradient_quarter), 5.0),
                                   [1, 0.25, 0], atol=1e-15)

    def test_zero_gain(self, heavy_ball):
        system = build_structure(heavy_ball)
        np.testing.assert_allclose(characteristic_polynomial(system, 0.0),
                                   np.convolve([1, -1], system.denominator))

    def test_batched_matches_single(self, fc_1_9):
        system = build_structure(preset("triple-momentum", fc_1_9))
        lambdas = np.linspace(1, 9, 7)
        batch = characteristic_polynomials(system, lambdas)
        for row, lam in zip(batch, lambdas):
            np.testing.assert_array_equal(row, characteristic_polynomial(system, lam))

    def test_agrees_with_companion_matrix(self):
        rng = np.random.default_rng(2024)
        for spec in random_specs(100, seed=5, max_k=5):
            system = build_structure(spec)
            lam = rng.uniform(-10, 10)
            expected = char_poly(companion_matrix(system, lam))
            np.testing.assert_allclose(characteristic_polynomial(system, lam), expected,
                                       rtol=1e-10, atol=1e-10)


class TestLiftedMatrix:
    def test_heavy_ball_diagonal(self, heavy_ball, diag_1_9):
        eigenvalues = linalg.eigvals(build_lifted_matrix(heavy_ball, diag_1_9))
        assert matched_distance(eigenvalues, [0.5, 0.5, -0.5, -0.5]) < 1e-6

    def test_gradient_descent_radius(self, gradient_quarter, diag_1_9):
        eigenvalues = linalg.eigvals(build_lifted_matrix(gradient_quarter, diag_1_9))
        assert np.max(np.abs(eigenvalues)) == pytest.approx(1.25, abs=1e-12)
        assert matched_distance(eigenvalues, [0, 0, 0.75, -1.25]) < 1e-12

    def test_scalar_hessian(self, gradient_quarter):
        fc = FunctionClass(1, 9)
        quadratic = QuadraticInstance(np.eye(3), np.zeros(3), fc=fc)
        eigenvalues = linalg.eigvals(build_lifted_matrix(gradient_quarter, quadratic))
        single = np.linalg.eigvals(companion_matrix(build_structure(gradient_quarter), 1.0))
        assert matched_distance(eigenvalues, np.repeat(single, 3)) < 1e-12

    def test_block_diagonalization(self):
        rng = np.random.default_rng(3)
        specs = random_specs(50, seed=3, max_k=4, alpha_scale=0.25)
        for i, spec in enumerate(specs):
            m = float(rng.uniform(0.1, 2))
            fc = FunctionClass(m, m * float(rng.uniform(1, 10)))
            quadratic = make_quadratic(int(rng.integers(1, 9)), fc, seed=i, spectrum="uniform")
            lifted = linalg.eigvals(build_lifted_matrix(spec, quadratic))
            system = build_structure(spec)
            union = np.concatenate([np.linalg.eigvals(companion_matrix(system, lam))
                                    for lam in quadratic.eigenvalues])
            scale = max(1.0, float(np.max(np.abs(union))))
            assert matched_distance(lifted, union) < 1e-8 * scale

    def test_lifted_state_matches_recurrence(self, fc_1_9):
        spec = MethodSpec(k=3, l=1, alpha=[0.05, 0.04], beta=[0.3, -0.1, 0.05], gamma=[0.9, 0.3, -0.2])
        quadratic = make_quadratic(4, fc_1_9, seed=8, spectrum="uniform")
        lifted = build_lifted_matrix(spec, quadratic)
        x_star = equilibrium_state(spec, quadratic.minimizer)
        history = quadratic.minimizer + np.random.default_rng(8).standard_normal((spec.k + 1, 4))
        state = stack_history(history) - x_star
        for _ in range(25):
            history = np.vstack([advance(spec, history, quadratic.hessian, quadratic.minimizer),
                                 history[:-1]])
            state = lifted @ state
            np.testing.assert_allclose(state + x_star, stack_history(history), rtol=1e-9, atol=1e-9)

    def test_equilibrium_state(self, heavy_ball):
        np.testing.assert_array_equal(equilibrium_state(heavy_ball, [1.0, 2.0]), [1, 2, 1, 2])


class TestTransferFunctions:
    def test_heavy_ball(self, heavy_ball):
        plant, compensator = transfer_functions(build_structure(heavy_ball))
        assert plant.numerator == (1.0,)
        assert plant.denominator == (1.0, -1.0)
        assert compensator.numerator == pytest.approx((0.25, 0.0))
        assert compensator.denominator == pytest.approx((1.0, -0.25))
        assert compensator.is_proper

    def test_gradient_descent(self, gradient_quarter):
        _, compensator = transfer_functions(build_structure(gradient_quarter))
        assert compensator.numerator == (0.25, 0.0)
        assert compensator.denominator == (1.0, -0.0)
        assert compensator.at_infinity() == 0.25

    def test_closed_loop_matches_characteristic_polynomial(self):
        rng = np.random.default_rng(9)
        for spec in random_specs(40, seed=9, max_k=5):
            system = build_structure(spec)
            plant, compensator = transfer_functions(system)
            assert compensator.is_proper
            lam = rng.uniform(0.1, 20)
            np.testing.assert_allclose(closed_loop_polynomial(plant, compensator, lam),
                                       characteristic_polynomial(system, lam), rtol=1e-12, atol=1e-12)


class TestQuadraticInstance:
    def test_gradient_and_value(self, diag_1_9):
        np.testing.assert_array_equal(diag_1_9.gradient([1.0, 1.0]), [1.0, 9.0])
        assert diag_1_9.value([1.0, 1.0]) == 5.0
        assert diag_1_9.dimension == 2

    def test_asymmetric_hessian(self):
        with pytest.raises(ValueError, match="symmetric"):
            QuadraticInstance(np.array([[1.0, 1.0], [0.0, 1.0]]), np.zeros(2))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="Dimension mismatch"):
            QuadraticInstance(np.eye(2), np.zeros(3))

    def test_spectrum_outside_class(self, fc_1_9):
        with pytest.raises(ValueError, match="outside"):
            QuadraticInstance(np.diag([0.5, 9.0]), np.zeros(2), fc=fc_1_9)

    def test_arrays_are_read_only(self, diag_1_9):
        with pytest.raises(ValueError):
            diag_1_9.hessian[0, 0] = 2.0


class TestRationalFunction:
    def test_zero_leading_denominator(self):
        with pytest.raises(ValueError):
            RationalFunction(numerator=(1.0,), denominator=(0.0, 1.0))

    def test_improper(self):
        improper = RationalFunction(numerator=(1.0, 0.0, 0.0), denominator=(1.0, 1.0))
        assert not improper.is_proper
        with pytest.raises(ValueError):
            improper.at_infinity()

    def test_evaluation(self):
        function = RationalFunction(numerator=(1.0,), denominator=(1.0, -1.0))
        assert function(3.0) == 0.5
        assert function.at_infinity() == 0.0
