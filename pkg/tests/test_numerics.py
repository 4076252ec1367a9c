"""Unit tests for the shared numerics toolbox."""

import math

import numpy as np
import pytest

from masscap import (
    SampledCurve,
    TailSpec,
    Tolerances,
    fit_power_tail,
    integrate_linear_system,
    interpolate,
    quad_tail,
)
from masscap.numerics import panel_integrals, right_cumulative, stencil_derivative


class TestTolerances:
    def test_defaults_are_consistent(self):
        tol = Tolerances()
        assert tol.accept_rel >= tol.ode_rel

    @pytest.mark.parametrize("field", ["ode_rel", "quad_rel", "accept_rel", "slope_slack"])
    def test_nonpositive_entries_rejected(self, field):
        with pytest.raises(ValueError):
            Tolerances(**{field: 0.0})

    def test_accept_below_ode_rejected(self):
        with pytest.raises(ValueError):
            Tolerances(ode_rel=1e-6, accept_rel=1e-8)


class TestSampledCurve:
    def test_nodes_reproduced_exactly(self):
        x = np.linspace(0.0, 2.0, 21)
        curve = SampledCurve(x, np.sin(x))
        assert np.array_equal(curve(x), np.sin(x))

    def test_monotone_data_interpolates_monotonically(self):
        # PCHIP never overshoots, even across a sharp knee.
        x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
        y = np.array([0.0, 0.1, 0.2, 5.0, 5.1])
        curve = SampledCurve(x, y)
        fine = curve(np.linspace(0.0, 4.0, 400))
        assert np.all(np.diff(fine) >= 0.0)

    def test_linear_order_is_piecewise_linear(self):
        curve = SampledCurve([0.0, 1.0], [1.0, 3.0], order=1)
        assert curve(0.25) == pytest.approx(1.5)

    def test_out_of_range_query_raises(self):
        curve = SampledCurve([0.0, 1.0], [0.0, 1.0])
        with pytest.raises(ValueError, match="outside the sampled range"):
            curve(1.5)

    def test_scalar_query_returns_float(self):
        curve = SampledCurve([0.0, 1.0, 2.0], [0.0, 1.0, 4.0])
        assert isinstance(curve(1.0), float)

    def test_interpolate_alias(self):
        curve = SampledCurve([0.0, 1.0, 2.0], [0.0, 1.0, 4.0])
        assert interpolate(curve, 1.0) == curve(1.0)

    @pytest.mark.parametrize(
        "x, y",
        [
            ([1.0, 0.0], [0.0, 1.0]),  # decreasing abscissae
            ([0.0, 0.0], [0.0, 1.0]),  # repeated abscissae
            ([0.0], [0.0]),  # too short
            ([0.0, 1.0], [0.0, np.nan]),  # non-finite
        ],
    )
    def test_bad_inputs_rejected(self, x, y):
        with pytest.raises(ValueError):
            SampledCurve(x, y)


class TestIntegrateLinearSystem:
    def test_scalar_exponential(self):
        (y,) = integrate_linear_system(lambda x: np.array([[1.0]]), [1.0], (0.0, 1.0))
        assert y(1.0) == pytest.approx(math.e, rel=1e-11)

    def test_rotation_returns_after_full_turn(self):
        A = np.array([[0.0, -1.0], [1.0, 0.0]])
        cos, sin = integrate_linear_system(lambda x: A, [1.0, 0.0], (0.0, 2.0 * math.pi))
        assert cos(2.0 * math.pi) == pytest.approx(1.0, abs=1e-10)
        assert sin(2.0 * math.pi) == pytest.approx(0.0, abs=1e-10)

    def test_backward_direction_seeds_the_right_end(self):
        (y,) = integrate_linear_system(
            lambda x: np.array([[1.0]]), [math.e], (0.0, 1.0), direction="backward"
        )
        assert y(0.0) == pytest.approx(1.0, rel=1e-11)

    def test_forward_backward_round_trip(self):
        A = np.array([[0.0, 1.0], [-2.0, -0.3]])
        fwd = integrate_linear_system(lambda x: A, [1.0, -0.5], (0.0, 3.0))
        end = [fwd[0](3.0), fwd[1](3.0)]
        back = integrate_linear_system(lambda x: A, end, (0.0, 3.0), direction="backward")
        assert back[0](0.0) == pytest.approx(1.0, rel=1e-9)
        assert back[1](0.0) == pytest.approx(-0.5, rel=1e-9)

    def test_explicit_grid_is_respected(self):
        grid = np.array([0.0, 0.25, 1.0])
        (y,) = integrate_linear_system(lambda x: np.array([[0.0]]), [2.0], (0.0, 1.0), grid=grid)
        assert np.array_equal(y.x, grid)
        assert np.allclose(y.y, 2.0)

    def test_unknown_direction_rejected(self):
        with pytest.raises(ValueError, match="direction"):
            integrate_linear_system(lambda x: np.array([[0.0]]), [1.0], (0.0, 1.0), direction="up")

    def test_empty_span_rejected(self):
        with pytest.raises(ValueError, match="span"):
            integrate_linear_system(lambda x: np.array([[0.0]]), [1.0], (1.0, 1.0))


class TestPanelsAndTails:
    def test_cumulative_inverse_square(self):
        # int_1^inf x^-2 = 1, split as panels to 1e4 plus the algebraic tail.
        grid = np.geomspace(1.0, 1e4, 200)
        panels = panel_integrals(lambda x: x**-2.0, grid)
        total = right_cumulative(panels, tail=1e-4)
        assert total[0] == pytest.approx(1.0, rel=1e-12)
        assert total[-1] == 1e-4

    def test_quad_tail_power_law(self):
        # int_2^inf x^-4 = 1/24.
        value = quad_tail(lambda x: x**-4.0, 2.0, TailSpec(exponent=4.0))
        assert value == pytest.approx(1.0 / 24.0, rel=1e-9)

    def test_quad_tail_with_subleading_correction(self):
        # int_1^inf x^2 (x+1)^-6 = 1/60; the integrand is x^-4 (1 + 1/x)^-6,
        # so the declared tail needs c1 = -6.
        value = quad_tail(lambda x: x**2 / (x + 1.0) ** 6, 1.0, TailSpec(exponent=4.0, c1=-6.0))
        assert value == pytest.approx(1.0 / 60.0, rel=1e-9)

    def test_quad_tail_rejects_wrong_exponent(self):
        with pytest.raises(ValueError, match="inconsistent"):
            quad_tail(lambda x: x**-3.0, 1.0, TailSpec(exponent=4.0))

    def test_tail_spec_validation(self):
        with pytest.raises(ValueError, match="exceed 1"):
            TailSpec(exponent=1.0)
        with pytest.raises(ValueError, match="cutoff"):
            TailSpec(exponent=2.0, cutoff=0.0)


class TestFitPowerTail:
    def test_recovers_exact_coefficients(self):
        x = np.geomspace(1.0, 1e5, 400)
        curve = SampledCurve(x, 3.0 * x**-2.0 * (1.0 + 5.0 / x))
        fit = fit_power_tail(curve, -2.0)
        assert fit.c0 == pytest.approx(3.0, rel=1e-10)
        assert fit.c1 == pytest.approx(5.0, rel=1e-6)

    def test_wrong_exponent_raises(self):
        x = np.geomspace(1.0, 1e5, 400)
        curve = SampledCurve(x, x**-2.0)
        with pytest.raises(ValueError, match="exponent"):
            fit_power_tail(curve, -3.0)

    def test_nuisance_column_removes_next_order_bias(self):
        x = np.geomspace(1.0, 1e3, 400)
        y = x**-1.0 * (1.0 + 2.0 / x + 40.0 / x**2)
        curve = SampledCurve(x, y)
        plain = fit_power_tail(curve, -1.0, nuisance=False, max_residual=1.0)
        guarded = fit_power_tail(curve, -1.0, max_residual=1.0)
        assert abs(guarded.c1 - 2.0) < abs(plain.c1 - 2.0)
        assert guarded.c1 == pytest.approx(2.0, rel=1e-6)


class TestStencilDerivative:
    @pytest.mark.parametrize("order", [4, 6])
    def test_convergence_rate(self, order):
        # Grids stay coarse so the order-6 edge stencils sit well above the
        # roundoff floor of the finite differences.
        errs = []
        for n in (16, 32):
            x = np.linspace(0.0, 1.0, n + 1)
            d = stencil_derivative(np.sin(x), x[1] - x[0], order=order)
            errs.append(np.max(np.abs(d - np.cos(x))))
        rate = math.log2(errs[0] / errs[1])
        assert rate > order - 0.5

    @pytest.mark.parametrize("order", [4, 6])
    def test_exact_on_matching_polynomial(self, order):
        # An (order+1)-point stencil differentiates degree-order polynomials
        # exactly, interior and edges alike.
        x = np.linspace(-1.0, 1.0, 31)
        y = x**order
        d = stencil_derivative(y, x[1] - x[0], order=order)
        assert np.allclose(d, order * x ** (order - 1), atol=1e-10)

    def test_odd_order_rejected(self):
        with pytest.raises(ValueError, match="even"):
            stencil_derivative(np.zeros(16), 0.1, order=3)

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError, match="samples"):
            stencil_derivative(np.zeros(4), 0.1, order=4)

    def test_nonpositive_spacing_rejected(self):
        with pytest.raises(ValueError, match="spacing"):
            stencil_derivative(np.zeros(16), 0.0)
