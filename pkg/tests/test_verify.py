"""Unit tests for the certification layer."""

import math

import numpy as np
import pytest

from masscap import (
    QCurve,
    case_report,
    constant_diagnostics,
    evaluate_Q,
    family_bumped,
    horizon_W_bound,
    level_flow,
    mass_functional_Fp,
    monotonicity_report,
    penrose_margin,
    q_limits,
)
from masscap.verify import GROWTH_CAP

PI = math.pi


@pytest.fixture(scope="module")
def negative_eps_flow():
    return level_flow(family_bumped(1.0, -0.05), 1.5)


class TestEvaluateQ:
    def test_growing_window_respects_cap(self, lab):
        _, grow = lab.triples(1.5)
        q = evaluate_Q(lab.flow(1.5, "schwarzschild", m=2.0), grow)
        assert float(np.max(np.exp(q.t / 1.5))) <= GROWTH_CAP
        assert q.t.size >= 16

    def test_decaying_covers_decimated_grid(self, lab):
        dec, _ = lab.triples(1.5)
        q = evaluate_Q(lab.flow(1.5, "schwarzschild", m=2.0), dec)
        assert q.t.size == 4096

    def test_p_mismatch_rejected(self, lab):
        dec, _ = lab.triples(1.5)
        with pytest.raises(ValueError, match="p ="):
            evaluate_Q(lab.flow(1.2, "schwarzschild", m=2.0), dec)


class TestMonotonicityReport:
    def _q(self, values):
        t = np.linspace(0.0, 1.0, len(values))
        return QCurve(flavor="growing", p=1.5, t=t, values=np.asarray(values, dtype=float))

    def test_increasing_curve_passes(self):
        rep = monotonicity_report(self._q([0.0, 1.0, 2.0, 3.0]))
        assert rep.max_violation == 0.0
        assert not rep.equality_flag

    def test_constant_curve_sets_equality(self):
        rep = monotonicity_report(self._q([5.0, 5.0, 5.0, 5.0]))
        assert rep.max_violation == 0.0
        assert rep.equality_flag

    def test_dip_is_flagged(self):
        rep = monotonicity_report(self._q([0.0, 1.0, 0.5, 2.0]))
        assert rep.max_violation > 0.0
        assert rep.min_forward_slope == pytest.approx(-0.5)

    def test_qcurve_validation(self):
        with pytest.raises(ValueError, match="flavor"):
            QCurve(flavor="sideways", p=1.5, t=np.zeros(3), values=np.zeros(3))
        with pytest.raises(ValueError, match="1-d"):
            QCurve(flavor="growing", p=1.5, t=np.zeros(3), values=np.zeros(4))


class TestLimitsAndBounds:
    def test_decaying_limit_vanishes(self, lab):
        dec, _ = lab.triples(1.5)
        flow = lab.flow(1.5, "schwarzschild", m=2.0)
        assert abs(q_limits(evaluate_Q(flow, dec), flow)) <= 1e-9

    def test_growing_limit_meets_resolved_bound_on_vacuum(self, lab):
        d = lab.report(1.5, "schwarzschild", m=2.0).diagnostics
        assert d["limit_growing"] == pytest.approx(d["growing_limit_bound_resolved"], rel=1e-6)

    def test_horizon_gap_scale_invariant_on_vacuum(self, lab):
        # W(0) depends only on the conformal class of the end, not the mass,
        # so the boundary gradient bound is tight for every member.
        model = lab.model(1.5)
        dec, _ = lab.triples(1.5)
        for mass in (1.0, 2.0, 5.0):
            gap = horizon_W_bound(lab.flow(1.5, "schwarzschild", m=mass), dec, model)
            assert abs(gap) <= 1e-9

    def test_horizon_gap_positive_off_vacuum(self, lab):
        model = lab.model(1.5)
        dec, _ = lab.triples(1.5)
        gap = horizon_W_bound(lab.flow(1.5, "bumped", m0=1.0, eps=0.1), dec, model)
        assert gap > 1e-3

    def test_mass_functional_limit_on_vacuum(self, lab):
        curve, limit = mass_functional_Fp(lab.flow(1.5, "schwarzschild", m=2.0))
        assert np.all(np.isfinite(curve.y))
        assert limit == pytest.approx(16.0 * PI, rel=1e-6)

    def test_growing_flavor_required_for_horizon_bound(self, lab):
        _, grow = lab.triples(1.5)
        with pytest.raises(ValueError, match="decaying"):
            horizon_W_bound(lab.flow(1.5, "schwarzschild", m=2.0), grow, lab.model(1.5))


class TestHypothesisChecks:
    def test_negative_curvature_rejected(self, lab, negative_eps_flow):
        with pytest.raises(ValueError, match="hypotheses"):
            penrose_margin(negative_eps_flow, lab.model(1.5))

    def test_case_report_propagates_the_rejection(self, lab, negative_eps_flow):
        dec, grow = lab.triples(1.5)
        with pytest.raises(ValueError, match="hypotheses"):
            case_report(negative_eps_flow, lab.model(1.5), dec, grow)

    def test_p_mismatch_rejected(self, lab):
        with pytest.raises(ValueError, match="disagree"):
            penrose_margin(lab.flow(1.2, "schwarzschild", m=2.0), lab.model(1.5))


class TestCaseReport:
    def test_vacuum_case_is_the_equality_case(self, lab):
        rep = lab.report(1.5, "schwarzschild", m=2.0)
        assert rep.equality_flag
        assert rep.max_violation == 0.0
        assert abs(rep.penrose_margin) <= 1e-8

    def test_bumped_case_has_strict_margin(self, lab):
        rep = lab.report(1.5, "bumped", m0=1.0, eps=0.1)
        assert not rep.equality_flag
        assert rep.penrose_margin > 0.01
        assert rep.min_forward_slope >= -1e-8
        assert rep.diagnostics["mass_functional_limit"] <= (
            rep.diagnostics["mass_functional_target"] + 1e-6
        )


class TestConstantDiagnostics:
    @pytest.mark.parametrize("p", [1.2, 1.5, 1.8])
    def test_measured_values_land_on_resolved_forms(self, lab, p):
        dec, grow = lab.triples(p)
        d = constant_diagnostics(lab.model(p), dec, grow)
        s = 3.0 - p
        assert d["a1_recurrence"] == pytest.approx(4.0 / s, rel=1e-9)
        assert d["exp_map_ratio"] == pytest.approx(1.0, rel=1e-9)
        assert d["g_constant_measured"] == pytest.approx(-4.0 / s, rel=1e-6)
        assert d["g_plus_sh_measured"] == pytest.approx(d["g_plus_sh_resolved"], rel=1e-6)
        assert d["growing_Q0_measured"] == pytest.approx(d["growing_Q0_resolved"], rel=1e-6)
