import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from besselgap import errors
from besselgap.surface import (a0_and_alpha_tilde, a_matrix, build_surface, c_const, nu, omega_vector,
                               q_eval, q_polynomial, sqrtR_sheet1, surface_invariants, t_matrix,
                               tau_matrix, validate)

import oracles
from conftest import G1, G2, G3, surface_for
from strategies import endpoint_configs

# Frozen from 30-digit tanh-sinh quadrature of the defining integrals for x = (1, 2, 3).
A11_ORACLE = 5.24411510858423957272
Q0_ORACLE = 1.22847329052223181288
OMEGA1_ORACLE = 2.39628046947118439492
Q_ROOT_ORACLE = -2.45694658104446362577
ALPHA_TILDE1_PER_ALPHA = -0.277242554908434384262
D1_PER_ALPHA = -1.01762686922728690987


class TestValidate:
    def test_valid_g1(self):
        cfg = validate((1, 2, 3), 0)
        assert cfg.g == 1 and cfg.x == (1.0, 2.0, 3.0)

    @pytest.mark.parametrize("x, alpha, exc", [
        ((2, 1, 3), 0, errors.NonIncreasingEndpoints),
        ((1,), -1, errors.AlphaOutOfRange),
        ((1, 2), 0, errors.EvenEndpointCount),
        ((0, 1, 2), 0, errors.NonPositiveEndpoint),
        ((1, 1, 2), 0, errors.NonIncreasingEndpoints),
    ])
    def test_rejections(self, x, alpha, exc):
        with pytest.raises(exc):
            validate(x, alpha)

    @given(st.lists(st.floats(0.01, 10), min_size=3, max_size=7, unique=True))
    def test_only_sorted_odd_lists_accepted(self, values):
        ok = len(values) % 2 == 1 and values == sorted(values)
        try:
            validate(values)
        except errors.InvalidConfiguration:
            assert not ok
        else:
            assert ok


class TestSheet:
    def test_g0_origin(self):
        assert sqrtR_sheet1(0.0, validate((1,))) == 1.0

    def test_gap_sign_matches_continuation(self):
        value = sqrtR_sheet1(-2.5, validate(G1))
        assert value == pytest.approx(-math.sqrt(1.5 * 0.5 * 0.5), rel=1e-14)
        assert value == pytest.approx(oracles.sqrtR_by_continuation(-2.5, G1).real, rel=1e-9)

    def test_g2_gap_signs_match_continuation(self):
        cfg = validate(G2)
        for s in (-2.5, -4.5, 0.5):
            assert sqrtR_sheet1(s, cfg) == pytest.approx(oracles.sqrtR_by_continuation(s, G2).real, rel=1e-8)

    def test_point_on_cut(self):
        with pytest.raises(errors.PointOnCut):
            sqrtR_sheet1(-1.5, validate(G1))


class TestPeriods:
    def test_a11_against_oracle(self):
        A, a_last, A_hat = a_matrix(validate(G1))
        assert A[0, 0] == pytest.approx(A11_ORACLE, rel=1e-10)
        assert A.dtype == np.float64 and a_last.dtype == np.float64

    @pytest.mark.parametrize("x", [G2, G3])
    def test_against_adaptive_quadrature(self, x):
        s = surface_for(x)
        A_full, B_full = oracles.periods(x)
        np.testing.assert_allclose(s.A, A_full[:, :-1], rtol=1e-9, atol=1e-11)
        np.testing.assert_allclose(s.a_last, A_full[:, -1], rtol=1e-9)
        np.testing.assert_allclose(s.b_periods, B_full, rtol=1e-9, atol=1e-11)

    def test_sign_convention_links_to_omega(self, g1_surface):
        assert g1_surface.Omega[0] / (4 * math.pi) == pytest.approx(np.linalg.inv(g1_surface.A)[0, 0], rel=1e-12)


class TestQ:
    def test_g0(self):
        assert len(q_polynomial(np.zeros((0, 0)), np.zeros(0))) == 0
        assert q_eval([], 3.7) == 0.5

    def test_g1_root_in_gap(self, g1_surface):
        q0 = g1_surface.q_coeffs[0]
        assert q0 == pytest.approx(Q0_ORACLE, rel=1e-11)
        root = -2 * q0
        assert -3 < root < -2
        assert root == pytest.approx(Q_ROOT_ORACLE, rel=1e-11)
        assert g1_surface.A_hat[0, 0] / g1_surface.A[0, 0] == pytest.approx(root, abs=1e-10)

    def test_singular_matrix(self):
        with pytest.raises(errors.SingularPeriodMatrix):
            q_polynomial(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))


class TestConstants:
    def test_c_g0(self):
        assert c_const(validate((1,)), []) == -0.25
        assert c_const(validate((5,)), []) == -1.25

    def test_c_g1(self, g1_surface):
        assert g1_surface.c == pytest.approx(Q0_ORACLE - 1.5, abs=1e-11)

    def test_omega(self, g1_surface):
        assert g1_surface.Omega[0] > 0
        assert g1_surface.Omega[0] == pytest.approx(OMEGA1_ORACLE, rel=1e-11)
        assert g1_surface.Omega[0] == pytest.approx(4 * math.pi * g1_surface.A_inv[0, 0], rel=1e-11)

    def test_omega_rejects_wrong_sign(self, g1_surface):
        with pytest.raises(errors.NonPositiveOmega):
            omega_vector(validate(G1), -np.asarray(g1_surface.q_coeffs) - 10.0)

    def test_omega_g2_matches_inverse_row(self, g2_surface):
        np.testing.assert_allclose(g2_surface.Omega, 4 * math.pi * g2_surface.A_inv[-1], rtol=1e-10)

    def test_tau_g1_is_i(self, g1_surface):
        A_full, B_full = oracles.periods(G1)
        assert g1_surface.tau[0, 0] == pytest.approx(B_full[0, 0] / A_full[0, 0], abs=1e-10)
        assert g1_surface.tau[0, 0].imag > 0

    def test_tau_g2_symmetric(self, g2_surface):
        assert np.max(np.abs(g2_surface.tau - g2_surface.tau.T)) < 1e-8

    def test_tau_rejects_asymmetry(self):
        cfg = validate(G2)
        s = surface_for(G2)
        skewed = s.b_periods.copy()
        skewed[0, 1] += 0.1j
        with pytest.raises(errors.AsymmetricTau):
            tau_matrix(cfg, s.A, bper=skewed)

    def test_d1_g0(self):
        for alpha in (0.3, 1.0, 2.5):
            assert build_surface(validate((1,), alpha)).d1 == pytest.approx(-alpha, rel=1e-13)
        assert build_surface(validate((4,), 1)).d1 == pytest.approx(-2.0, rel=1e-13)

    def test_alpha_zero_vanishes(self, g2_surface):
        assert np.all(g2_surface.alpha_tilde == 0) and g2_surface.d1 == 0

    def test_alpha_tilde_and_d1_against_oracle(self):
        s = build_surface(validate(G1, 1.0))
        assert s.alpha_tilde[0] == 0.5
        assert s.alpha_tilde[1] == pytest.approx(ALPHA_TILDE1_PER_ALPHA, rel=1e-10)
        assert s.d1 == pytest.approx(D1_PER_ALPHA, rel=1e-10)

    def test_a0_function_matches_surface(self):
        cfg = validate(G2, 0.4)
        s = build_surface(cfg)
        a0, at, d1 = a0_and_alpha_tilde(cfg, s.A)
        np.testing.assert_allclose(a0, s.a0, rtol=1e-12)
        assert d1 == pytest.approx(s.d1, rel=1e-12)


class TestNu:
    def test_r_zero(self):
        s = build_surface(validate(G2, 0.6))
        np.testing.assert_array_equal(nu(0.0, s), -s.alpha_tilde[1:])

    def test_full_turn(self, g1_surface):
        r = 4 * math.pi ** 2 / g1_surface.Omega[0] ** 2
        assert nu(r, g1_surface)[0] == pytest.approx(-1.0, rel=1e-14)

    def test_derivative_is_inverse_row(self, g2_surface):
        r, h = 30.0, 1e-4
        fd = (nu(r + h, g2_surface) - nu(r - h, g2_surface)) / (2 * h)
        np.testing.assert_allclose(fd, -g2_surface.A_inv[-1] / math.sqrt(r), rtol=1e-7)

    def test_negative_r(self, g1_surface):
        with pytest.raises(errors.NegativeR):
            nu(-1.0, g1_surface)


class TestTMatrix:
    def test_g1(self, g1_surface):
        assert t_matrix(g1_surface.A, g1_surface.A_hat)[0, 0] == pytest.approx(
            g1_surface.A_hat[0, 0] / g1_surface.A[0, 0], rel=1e-15)

    @pytest.mark.parametrize("x", [G2, G3])
    def test_char_poly(self, x):
        s = surface_for(x)
        np.testing.assert_allclose(np.poly(s.T)[1:], 2 * s.q_coeffs[::-1], rtol=1e-9)

    @pytest.mark.parametrize("x", [G2, G3])
    def test_eigenvalues_one_per_gap(self, x):
        s = surface_for(x)
        eig = np.linalg.eigvals(s.T)
        assert np.max(np.abs(eig.imag)) < 1e-9
        eig = np.sort(eig.real)[::-1]
        for j, value in enumerate(eig, 1):
            lo, hi = s.config.gap(j)
            assert lo < value < hi


@settings(max_examples=20)
@given(endpoint_configs(), st.floats(-0.9, 2.0))
def test_identities_hold_for_random_configs(x, alpha):
    inv = surface_invariants(build_surface(validate(x, alpha)))
    assert inv["omega_inverse_row"] < 1e-8
    assert inv["charpoly"] < 1e-8
    assert inv["tau_symmetry"] < 1e-8
    assert inv["tau_min_eig"] > 0
    assert inv["normalization"] < 1e-12
    assert inv["gap_vanishing"] < 1e-9
    assert inv["q_roots_in_gaps"] == 1.0


@settings(max_examples=10)
@given(endpoint_configs(genera=(1, 2)), st.floats(0.2, 5.0))
def test_scaling_covariance(x, lam):
    a = build_surface(validate(x)).Omega
    b = build_surface(validate([lam * v for v in x])).Omega
    np.testing.assert_allclose(b, math.sqrt(lam) * a, rtol=1e-8)


def test_real_part_of_tau_vanishes():
    for x in (G1, G2, G3):
        assert np.max(np.abs(surface_for(x).tau.real)) < 1e-12


def test_deterministic():
    a, b = build_surface(validate(G3, 0.3)), build_surface(validate(G3, 0.3))
    for name in ("A", "q_coeffs", "Omega", "tau", "T", "alpha_tilde"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_surface_is_immutable(g1_surface):
    with pytest.raises(ValueError):
        g1_surface.A[0, 0] = 1.0
