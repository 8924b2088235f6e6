import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import qmc

from besselgap.errors import ImaginaryPartTooLarge
from besselgap.theta import ThetaEvaluator

import oracles
from conftest import G2, G3, surface_for

# theta(0 | i) and theta'(1/4 | i), frozen from 40-digit mpmath jtheta(3, .) evaluations.
THETA0_I = 1.08643481121330801457
THETA_PRIME_QUARTER_I = -0.543042112581374059


def random_tau(seed, g):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(g, g)) * 0.4
    re = rng.uniform(-0.5, 0.5, size=(g, g))
    return (re + re.T) / 2 + 1j * (m @ m.T + 0.6 * np.eye(g))


@st.composite
def taus(draw, genera=(1, 2, 3)):
    return random_tau(draw(st.integers(0, 2 ** 32 - 1)), draw(st.sampled_from(genera)))


def small_points(rng, n, g, im=0.2):
    return rng.uniform(-1, 1, size=(n, g)) + 1j * rng.uniform(-im, im, size=(n, g))


def test_one_dimensional_oracle():
    ev = ThetaEvaluator(np.array([[1j]]))
    assert abs(ev.theta(np.zeros(1)) - oracles.theta_1d(0, 1j)) < 1e-13
    assert ev.theta(np.zeros(1)).real == pytest.approx(THETA0_I, abs=1e-14)


def test_gradient_one_dimensional_oracle():
    ev = ThetaEvaluator(np.array([[1j]]))
    grad = ev.theta_grad(np.array([0.25]))[0]
    assert abs(grad - oracles.theta_1d(0.25, 1j, derivative=True)) < 1e-12
    assert grad.real == pytest.approx(THETA_PRIME_QUARTER_I, abs=1e-12)


@settings(max_examples=10)
@given(taus())
def test_even(tau):
    ev = ThetaEvaluator(tau)
    z = small_points(np.random.default_rng(1), 100, len(tau), im=0.9 * ev.z_im_max / np.sqrt(len(tau)))
    assert np.max(np.abs(ev.theta(-z) - ev.theta(z))) < 1e-12


@settings(max_examples=10)
@given(taus(genera=(1, 2)), st.integers(0, 1000))
def test_quasi_periodicity(tau, seed):
    g = len(tau)
    rng = np.random.default_rng(seed)
    lam = rng.integers(-2, 3, size=g)
    lam_prime = rng.integers(-2, 3, size=g)
    shift = lam_prime + tau @ lam
    ev = ThetaEvaluator(tau, z_im_max=float(np.linalg.norm(shift.imag)) + 0.5)
    z = small_points(rng, 5, g)
    lhs = ev.theta(z + shift)
    factor = np.exp(-1j * np.pi * (2 * z @ lam + lam @ tau @ lam))
    rhs = factor * ev.theta(z)
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-10


def test_gradient_vanishes_at_origin():
    for tau in (random_tau(3, 2), surface_for(G3).tau):
        assert np.max(np.abs(ThetaEvaluator(tau).theta_grad(np.zeros(len(tau))))) < 1e-13


@settings(max_examples=10)
@given(taus(), st.integers(0, 1000))
def test_gradient_matches_finite_differences(tau, seed):
    g = len(tau)
    ev = ThetaEvaluator(tau, z_im_max=1.0)
    z = small_points(np.random.default_rng(seed), 3, g)
    grad = ev.theta_grad(z)
    h = 1e-5
    for j in range(g):
        e = np.zeros(g)
        e[j] = h
        fd = (ev.theta(z + e) - ev.theta(z - e)) / (2 * h)
        assert np.max(np.abs(fd - grad[:, j]) / (1 + np.abs(grad[:, j]))) < 1e-7


def test_theta_and_grad_consistent():
    ev = ThetaEvaluator(surface_for(G2).tau)
    z = small_points(np.random.default_rng(4), 7, 2)
    v, gr = ev.theta_and_grad(z)
    np.testing.assert_allclose(v, ev.theta(z), rtol=1e-15)
    np.testing.assert_allclose(gr, ev.theta_grad(z), rtol=1e-15)


@pytest.mark.parametrize("x", [G2, G3])
def test_positive_on_real_torus(x):
    tau = surface_for(x).tau
    g = len(tau)
    u = qmc.Sobol(d=g, scramble=False).random(1024)[:1000]
    values = ThetaEvaluator(tau).theta(u)
    assert np.max(np.abs(values.imag)) < 1e-12
    assert np.min(values.real) > 0


@pytest.mark.parametrize("seed, g", [(5, 1), (6, 2), (7, 3)])
def test_radius_doubling_changes_nothing(seed, g):
    ev = ThetaEvaluator(random_tau(seed, g), tol=1e-15)
    u = np.random.default_rng(seed).uniform(0, 1, size=(100, g))
    wide = ev.with_radius(2 * ev.radius)
    assert len(wide.lattice) > len(ev.lattice)
    assert np.max(np.abs(wide.theta(u) - ev.theta(u))) < 1e-14


def test_imaginary_part_guard():
    ev = ThetaEvaluator(np.array([[1j]]), z_im_max=0.5)
    with pytest.raises(ImaginaryPartTooLarge):
        ev.theta(np.array([0.6j]))


def test_batch_shapes():
    ev = ThetaEvaluator(random_tau(8, 2))
    z = np.zeros((3, 4, 2))
    assert ev.theta(z).shape == (3, 4)
    assert ev.theta_grad(z).shape == (3, 4, 2)
    assert isinstance(ev.theta(np.zeros(2)), complex)


def test_genus_zero():
    ev = ThetaEvaluator(np.zeros((0, 0)))
    assert ev.theta(np.zeros(0)) == 1.0
