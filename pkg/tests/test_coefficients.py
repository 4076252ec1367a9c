"""Unit tests for the coefficient triples on the reference slice."""

import math

import numpy as np
import pytest

from masscap import (
    model_constancy,
    perfect_square_residual,
    solve_growing,
    system_residual,
)
from masscap.coefficients import abc_curves, growth_ode
from masscap.frobenius import series_coefficients

PI = math.pi


class TestDecayingFlavor:
    def test_sign_certificates_on_the_grid(self, lab):
        dec, _ = lab.triples(1.5)
        assert np.all(dec.h_curve.y > 0.0)
        assert np.all(dec.f_curve.y < 0.0)

    def test_tail_normalization_is_canonical(self, lab):
        # g ~ r^-sigma (1 + b1/r) with unit leading coefficient; the fitted
        # 1/r correction must match the series recurrence.
        dec, _ = lab.triples(1.5)
        b1 = series_coefficients(growth_ode(1.5), root=-3.0, n=1).coefficients[0]
        assert dec.tail_g.c0 == pytest.approx(1.0, rel=1e-9)
        assert dec.tail_g.c1 == pytest.approx(b1, rel=1e-5)

    @pytest.mark.parametrize("p", [1.2, 1.5, 1.8])
    def test_boundary_identity(self, lab, p):
        model = lab.model(p)
        dec, _ = lab.triples(p)
        s = 3.0 - p
        f0, g0, h0 = dec.boundary_values()
        W0 = float(model.Ws_curve.y[0])
        assert -4.0 * PI * s**2 * f0 / (g0 + 2.0 * s * h0) == pytest.approx(W0, rel=1e-8)

    @pytest.mark.parametrize("p", [1.2, 1.5, 1.8])
    def test_combination_vanishes_identically(self, lab, p):
        model = lab.model(p)
        dec, _ = lab.triples(p)
        W0 = float(model.Ws_curve.y[0])
        Q0, dev = model_constancy(dec, model)
        assert abs(Q0) <= 1e-8 * W0
        assert dev <= 1e-8 * W0


class TestGrowingFlavor:
    def test_sign_pattern(self, lab):
        _, grow = lab.triples(1.5)
        assert np.all(grow.h_curve.y > 0.0)
        assert np.all(grow.g_curve.y < 0.0)
        assert grow.c1 > 0.0

    def test_growth_normalization(self, lab):
        # h ~ r/(3-p) + 1 after the c1 rescale.
        _, grow = lab.triples(1.5)
        assert 1.5 * grow.tail_h.c0 == pytest.approx(1.0, rel=1e-9)
        assert grow.tail_h.c1 == pytest.approx(1.5, rel=1e-6)

    def test_f_exponential_map_normalization(self, lab):
        _, grow = lab.triples(1.5)
        far = grow.f_curve.y[-1] - grow.c_tilde * math.exp(grow.t_samples[-1] / 1.5)
        assert far == pytest.approx(1.5, rel=1e-5)

    @pytest.mark.parametrize("p", [1.2, 1.5, 1.8])
    def test_combination_constant_with_resolved_value(self, lab, p):
        model = lab.model(p)
        _, grow = lab.triples(p)
        s = 3.0 - p
        Q0, dev = model_constancy(grow, model)
        assert dev <= 1e-8 * abs(Q0)
        assert Q0 == pytest.approx(8.0 * PI * s**3 + 16.0 * PI * s**2 - 16.0 * PI * s, rel=1e-6)

    def test_seed_size_does_not_matter(self, lab):
        # The growing flavor is defined modulo decaying admixture, so the
        # invariants are the constant combination and the large-radius
        # triple, not the boundary values.
        model = lab.model(1.5)
        _, base = lab.triples(1.5)
        Q0_base, _ = model_constancy(base, model)
        t_probe = float(model.t_of_r(1.0e4))
        fgh_base = np.array(base.fgh_at_t(t_probe))
        for eps in (0.005, 0.02):
            alt = solve_growing(model, eps=eps)
            Q0_alt, _ = model_constancy(alt, model)
            assert Q0_alt == pytest.approx(Q0_base, rel=1e-8)
            assert np.allclose(np.array(alt.fgh_at_t(t_probe)), fgh_base, rtol=1e-10)

    def test_nonpositive_seed_rejected(self, lab):
        with pytest.raises(ValueError, match="eps"):
            solve_growing(lab.model(1.5), eps=0.0)


class TestResiduals:
    @pytest.mark.parametrize("flavor_index", [0, 1], ids=["decaying", "growing"])
    def test_perfect_square_relation(self, lab, flavor_index):
        model = lab.model(1.5)
        sol = lab.triples(1.5)[flavor_index]
        res = perfect_square_residual(sol, model)
        assert float(np.max(np.abs(res.y))) <= 1e-6 * float(np.max(np.abs(sol.g_curve.y)))

    def test_system_residual_within_budget(self, lab):
        model = lab.model(1.5)
        coeffs = abc_curves(model)
        for sol in lab.triples(1.5):
            assert system_residual(sol, coeffs, model) <= 1e-6


class TestEvaluationInterface:
    def test_spline_reproduces_nodes(self, lab):
        dec, grow = lab.triples(1.5)
        for sol in (dec, grow):
            f, g, h = sol.fgh_at_t(sol.t_samples)
            assert np.allclose(f, sol.f_curve.y, rtol=1e-12)
            assert np.allclose(g, sol.g_curve.y, rtol=1e-12)
            assert np.allclose(h, sol.h_curve.y, rtol=1e-12)

    def test_asymptotic_extension_is_continuous(self, lab):
        dec, grow = lab.triples(1.5)
        for sol, rel in ((dec, 1e-5), (grow, 1e-7)):
            inside = np.array(sol.fgh_at_t(sol.t_max))
            outside = np.array(sol.fgh_at_t(sol.t_max + 1e-8))
            assert np.allclose(outside, inside, rtol=rel)

    def test_negative_t_rejected(self, lab):
        dec, _ = lab.triples(1.5)
        with pytest.raises(ValueError, match="below"):
            dec.fgh_at_t(-0.1)

    def test_extension_range_is_bounded(self, lab):
        # One extra decade of radius is trusted; far beyond that must raise.
        dec, _ = lab.triples(1.5)
        s = dec.s
        t_far = s * math.log(100.0 * dec.r_max / dec.c_tilde)
        with pytest.raises(ValueError, match="asymptotic extension"):
            dec.fgh_at_t(t_far)
