import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from besselgap import errors
from besselgap.asym import Regime, build_expansion, fit_constant, predict_log_F
from besselgap.flow import Flow
from besselgap.surface import build_surface, validate

from conftest import G1, G2, flow_for
from strategies import endpoint_configs


def flow_with_alpha(x, alpha):
    return flow_for(x, alpha)


class TestCoefficients:
    @pytest.mark.parametrize("alpha", [0.0, 0.7])
    def test_log_coefficients(self, alpha):
        f = flow_with_alpha(G2, alpha)
        assert build_expansion(f, "dio-ergodic").log_coeff == pytest.approx(-(2 + 2 * alpha ** 2) / 8)
        assert build_expansion(f, "ergodic").log_coeff == pytest.approx(-(2 + 2 * alpha ** 2) / 8)
        assert build_expansion(f, "general").log_coeff == pytest.approx((1 - 4 * alpha ** 2) / 16)
        f1 = flow_with_alpha(G1, alpha)
        assert build_expansion(f1, "g1-closed").log_coeff == pytest.approx(-(1 + 2 * alpha ** 2) / 8)

    def test_oscillating_terms_by_regime(self, g2_flow):
        assert build_expansion(g2_flow, "ergodic").theta_term is None
        assert build_expansion(g2_flow, "dio-ergodic").theta_term is not None
        general = build_expansion(g2_flow, "general")
        assert general.theta_term is not None and general.integral_term is not None

    def test_linear_and_root_terms(self):
        f = flow_with_alpha(G2, 0.7)
        e = build_expansion(f, "dio-ergodic")
        assert e.c_r == f.surface.c
        assert e.d1_sqrt == -f.surface.d1

    def test_sqrt_term_absent_without_alpha(self, g2_flow):
        assert build_expansion(g2_flow, "general").d1_sqrt == 0.0

    def test_diophantine_uses_time_averages(self, g1_flow):
        # Both endpoint averages are 2, so 1/16 - 3 * 2 / 32 = -1/8.
        assert build_expansion(g1_flow, "diophantine").log_coeff == pytest.approx(-0.125, abs=1e-3)


class TestGenusZero:
    def test_hard_edge_alpha_zero(self):
        f = flow_for((1.0,))
        for r in (0.5, 10.0, 400.0):
            assert predict_log_F(r, "g0-closed", f) == pytest.approx(-r / 4, rel=1e-15)

    def test_hard_edge_alpha_one(self):
        f = flow_for((1.0,), 1.0)
        r = 37.0
        expected = -r / 4 + math.sqrt(r) - math.log(r) / 4
        assert predict_log_F(r, "g0-closed", f) == pytest.approx(expected, rel=1e-14)

    def test_general_regime_reduces_to_closed_form(self):
        f = flow_for((2.0,), 0.5)
        closed = build_expansion(f, "g0-closed")
        general = build_expansion(f, "general")
        rs = np.array([4.0, 50.0, 300.0])
        diff = general(rs) - closed(rs)
        assert np.ptp(diff) < 1e-9


class TestGeneralRegime:
    @pytest.mark.parametrize("x, alpha", [(G1, 0.0), (G2, 0.4)])
    def test_derivative(self, x, alpha):
        f = flow_with_alpha(x, alpha)
        s = f.surface
        r, h = 40.0, 1e-4
        # Moving M only shifts the constant; putting it at r - h makes the
        # integral over the difference stencil a short, accurate one.
        e = build_expansion(f, "general", M=r - h)
        fd = (e(r + h) - e(r - h)) / (2 * h)
        nu = np.mod(s.nu(r), 1.0)
        value, grad = f.theta.theta_and_grad(nu)
        dnu = -s.Omega / (4 * math.pi * math.sqrt(r))
        dlog_theta = float(np.real(grad @ dnu / value))
        B = f.B_matrix(-np.asarray(x), nu[None, :])[0]
        expected = (s.c - s.d1 / (2 * math.sqrt(r)) + (1 - 4 * alpha ** 2) / (16 * r)
                    + dlog_theta - B.sum() / (32 * r))
        assert fd == pytest.approx(expected, rel=1e-6, abs=1e-8)

    def test_consistent_with_dio_ergodic(self, g1_flow):
        rs = np.geomspace(1e2, 1e4, 7)
        gap = build_expansion(g1_flow, "general")(rs) - build_expansion(g1_flow, "dio-ergodic")(rs)
        assert np.ptp(gap) < 0.05

    def test_r_below_M_rejected(self, g1_flow):
        with pytest.raises(ValueError):
            build_expansion(g1_flow, "general", M=5.0)(2.0)

    def test_negative_r(self, g1_flow):
        with pytest.raises(errors.NegativeR):
            predict_log_F(-1.0, "dio-ergodic", g1_flow)


def test_decreasing_for_large_r(g2_flow):
    rs = np.linspace(1e3, 1e4, 200)
    assert np.all(np.diff(build_expansion(g2_flow, "dio-ergodic")(rs)) < 0)


@settings(max_examples=15)
@given(endpoint_configs(), st.floats(-0.9, 2.0))
def test_linear_coefficient_negative(x, alpha):
    assert build_surface(validate(x, alpha)).c < 0


class TestRegimeGuards:
    def test_dependent_frequencies_refused(self, g2_flow):
        s = dataclasses.replace(g2_flow.surface, Omega=np.array([1.0, 2.0]))
        f = Flow(s, theta=g2_flow.theta, abel=g2_flow.abel)
        for regime in ("ergodic", "dio-ergodic"):
            with pytest.raises(errors.RegimeRequiresErgodic):
                build_expansion(f, regime)
        assert build_expansion(f, "diophantine", T_average=10.0).regime is Regime.DIOPHANTINE

    def test_closed_forms_need_matching_genus(self, g1_flow, g2_flow):
        with pytest.raises(errors.InvalidConfiguration):
            build_expansion(g1_flow, "g0-closed")
        with pytest.raises(errors.InvalidConfiguration):
            build_expansion(g2_flow, "g1-closed")

    def test_unknown_regime(self, g1_flow):
        with pytest.raises(ValueError):
            build_expansion(g1_flow, "chaotic")


class TestFit:
    R = np.geomspace(80, 160, 9)

    def test_pure_offset(self):
        pred = np.sin(self.R)
        res = fit_constant(self.R, pred + 7, pred)
        assert res.C_hat == pytest.approx(7.0, abs=1e-13)
        assert res.rms < 1e-13

    def test_power_decay(self):
        r = np.geomspace(50, 5000, 12)
        res = fit_constant(r, 7 + r ** -0.5, np.zeros_like(r))
        assert abs(res.drift_exponent + 0.5) < 0.1

    def test_modulated_decay_with_phases(self):
        r = np.geomspace(50, 5000, 20)
        phase = np.sqrt(r) * 0.37
        direct = 3 + r ** -1.0 * (1 + 0.5 * np.cos(2 * np.pi * phase))
        res = fit_constant(r, direct, np.zeros_like(r), phases=phase[:, None])
        assert abs(res.drift_exponent + 1.0) < 0.1

    def test_too_few_points(self):
        with pytest.raises(errors.InsufficientPoints):
            fit_constant([1, 2, 3, 4], [0] * 4, [0] * 4)

    def test_misaligned(self):
        with pytest.raises(errors.InsufficientPoints):
            fit_constant([1, 2, 3, 4, 5], [0] * 6, [0] * 5)

    @given(st.lists(st.floats(-5, 5), min_size=6, max_size=12))
    def test_shape_invariants(self, values):
        r = np.arange(1, len(values) + 1, dtype=float) * 10
        res = fit_constant(r, values, np.zeros(len(values)))
        assert res.rms >= 0 and len(res.residuals) == len(values)
        assert abs(np.mean(res.residuals)) < 1e-9 * (1 + max(map(abs, values)))
