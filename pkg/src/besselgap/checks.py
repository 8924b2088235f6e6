"""Invariant suite run by ``besselgap selftest``.

Each check returns ``(passed, detail)``; ``run_all`` yields one
``CheckResult`` per check.  Configurations are fixed so the suite is
deterministic and finishes in well under a minute.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from . import bessel, errors
from .abel import endpoint_half_periods, lattice_distance, reduce_mod_lattice
from .asym import Regime, build_expansion, fit_constant
from .flow import Flow, Verdict, classify_flow
from .fredholm import log_det
from .surface import build_surface, surface_invariants, validate
from .theta import ThetaEvaluator

CONFIGS = [(1.0, 2.0, 3.0), (1.0, 2.0, 3.0, 4.0, 5.0), (0.5, 1.3, 2.0, 3.1, 3.5, 4.9, 6.0)]


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.module:<9} {self.name}: {self.detail}"


_REGISTRY = []


def check(module, name):
    def wrap(fn):
        _REGISTRY.append((module, name, fn))
        return fn
    return wrap


_cache = {}


def _surface(x, alpha=0.0):
    key = (tuple(x), alpha)
    if key not in _cache:
        _cache[key] = build_surface(validate(x, alpha))
    return _cache[key]


def _flow(x):
    key = ("flow", tuple(x))
    if key not in _cache:
        _cache[key] = Flow(_surface(x))
    return _cache[key]


# --- surface ---------------------------------------------------------------
@check("surface", "identities (inverse-row, char-poly, tau, normalisation, gap-vanishing)")
def _surface_identities():
    worst = {}
    ok = True
    for x in CONFIGS:
        inv = surface_invariants(_surface(x, 0.3))
        ok &= inv["omega_inverse_row"] < 1e-8 and inv["charpoly"] < 1e-8
        ok &= inv["tau_symmetry"] < 1e-8 and inv["tau_min_eig"] > 0
        ok &= inv["normalization"] < 1e-12 and inv["gap_vanishing"] < 1e-10
        ok &= inv["q_roots_in_gaps"] == 1.0
        for k, v in inv.items():
            worst[k] = max(worst.get(k, -np.inf), v)
    return ok, ", ".join(f"{k}={v:.2g}" for k, v in worst.items())


@check("surface", "scaling covariance Omega(lambda x) = sqrt(lambda) Omega(x)")
def _scaling():
    lam = 2.5
    x = CONFIGS[1]
    a = _surface(x).Omega
    b = build_surface(validate([lam * v for v in x])).Omega
    err = float(np.max(np.abs(b / (math.sqrt(lam) * a) - 1)))
    return err < 1e-8, f"relative error {err:.2g}"


@check("surface", "configuration validation")
def _validation():
    cases = [((2, 1, 3), 0, errors.NonIncreasingEndpoints), ((1,), -1, errors.AlphaOutOfRange),
             ((1, 2), 0, errors.EvenEndpointCount), ((0, 1, 2), 0, errors.NonPositiveEndpoint)]
    for x, a, exc in cases:
        try:
            validate(x, a)
        except exc:
            continue
        return False, f"{x}, alpha={a} not rejected"
    return True, "all invalid inputs rejected"


# --- theta -----------------------------------------------------------------
@check("theta", "evenness, quasi-periodicity and real positivity")
def _theta_laws():
    tau = _surface(CONFIGS[1]).tau
    g = tau.shape[0]
    big = ThetaEvaluator(tau, z_im_max=6.0)
    pts = qmc.Halton(d=2 * g, scramble=False).random(101)[1:]
    z = (pts[:, :g] - 0.5) + 1j * 0.3 * (pts[:, g:] - 0.5)
    even = float(np.max(np.abs(big(z) - big(-z)) / np.abs(big(z))))
    lam = np.array([[1, -2], [2, 1], [-1, 0]])
    worst = 0.0
    for m in lam:
        shift = np.roll(m, 1) + tau @ m
        factor = np.exp(-1j * np.pi * (2 * z @ m + m @ tau @ m))
        worst = max(worst, float(np.max(np.abs(big(z + shift) - factor * big(z)) / np.abs(factor * big(z)))))
    real = qmc.Halton(d=g, scramble=False).random(1000)
    vals = big(real.astype(complex))
    positive = bool(np.all(vals.real > 0) and np.max(np.abs(vals.imag)) < 1e-12)
    return even < 1e-12 and worst < 1e-10 and positive, f"even {even:.2g}, quasi {worst:.2g}, positive {positive}"


@check("theta", "truncation radius doubling and gradient")
def _theta_truncation():
    th = ThetaEvaluator(_surface(CONFIGS[1]).tau)
    u = qmc.Halton(d=2, scramble=False).random(100).astype(complex)
    change = float(np.max(np.abs(th.with_radius(2 * th.radius)(u) - th(u))))
    z = np.array([0.13 + 0.05j, -0.21 + 0.02j])
    grad = th.theta_grad(z)
    h = 1e-5
    fd = np.array([(th(z + h * e) - th(z - h * e)) / (2 * h) for e in np.eye(2)])
    gerr = float(np.max(np.abs(grad - fd)) / (1 + np.max(np.abs(grad))))
    return change < th.tol * 10 and gerr < 1e-7, f"radius doubling {change:.2g}, gradient {gerr:.2g}"


# --- abel ------------------------------------------------------------------
@check("abel", "branch-point values match the half-period table")
def _abel_endpoints():
    worst = 0.0
    for x in CONFIGS:
        s = _surface(x)
        ab = _flow(x).abel
        table = endpoint_half_periods(s)
        for k, xv in enumerate(x):
            worst = max(worst, lattice_distance(ab(-xv), table[k, 0], s.tau),
                        lattice_distance(ab(-xv, "lower"), table[k, 1], s.tau))
        e1 = np.eye(s.g)[0]
        worst = max(worst, lattice_distance(ab(math.inf), e1 / 2, s.tau))
    return worst < 1e-8, f"max lattice distance {worst:.2g}"


@check("abel", "jump relations on cuts and gaps; reduction idempotent")
def _abel_jumps():
    x = CONFIGS[1]
    s = _surface(x)
    ab = _flow(x).abel
    g = s.g
    worst = 0.0
    for j in range(1, g + 1):
        e = np.eye(g + 1)[:, :g]
        mid_cut = sum(s.config.cut(j)) / 2 + 0.1 * (s.config.cut(j)[1] - s.config.cut(j)[0])
        worst = max(worst, lattice_distance(ab(mid_cut) + ab(mid_cut, "lower"), e[0] - e[j - 1], s.tau))
        mid_gap = sum(s.config.gap(j)) / 2
        jump = s.tau[:, :j].sum(axis=1)
        worst = max(worst, float(np.max(np.abs(ab(mid_gap) - ab(mid_gap, "lower") - jump))))
    v = np.array([1.7 + 2.3j, -0.4 + 0.9j])
    once = reduce_mod_lattice(v, s.tau)
    idem = float(np.max(np.abs(reduce_mod_lattice(once, s.tau) - once)))
    return worst < 1e-8 and idem == 0.0, f"jump residual {worst:.2g}, idempotence {idem:.2g}"


# --- flow ------------------------------------------------------------------
@check("flow", "divisor points: u=0, interval membership, node independence, continuity")
def _divisors():
    ok, notes = True, []
    for x in CONFIGS[:2]:
        f = _flow(x)
        g = f.g
        b0 = f.divisor_array(np.zeros(g))[0]
        err0 = float(np.max(np.abs(b0 + np.array(x[1::2]))))
        U = qmc.Halton(d=g, scramble=False).random(100)
        b = f.divisor_array(U)
        lo = np.array([-x[2 * k] for k in range(1, g + 1)])
        hi = np.array([-x[2 * k - 1] for k in range(1, g + 1)])
        inside = bool(np.all((b >= lo) & (b <= hi)))
        other = Flow(f.surface, f.theta, f.abel, node_shift=0.37).divisor_array(U)
        indep = float(np.max(np.abs(other - b)))
        path = np.linspace(0, 1, 1001)[:, None] * np.ones(g) * np.array([1.0, 0.618][:g])
        jumps = float(np.max(np.abs(np.diff(f.divisor_array(path), axis=0))))
        ok &= err0 < 1e-8 and inside and indep < 1e-8 and jumps < 0.05
        notes.append(f"g={g}: b(0) {err0:.1g}, nodes {indep:.1g}, max step {jumps:.2g}")
    return ok, "; ".join(notes)


@check("flow", "space average of prod(z - b) equals det(zI - T) = 2q(z)")
def _triangle():
    f = _flow(CONFIGS[1])
    s = f.surface
    z = np.array([0.0, -1.5, -2.5, -3.5, -4.5])
    avg = f.space_average_poly(z, n_samples=2 ** 13)
    det = np.array([np.linalg.det(v * np.eye(s.g) - s.T) for v in z])
    zs = np.max(np.abs(avg.estimate - det) / avg.stderr)
    agree = float(np.max(np.abs(det - 2 * s.q(z))))
    return zs < 3 and agree < 1e-10, f"max |est - det| / stderr = {zs:.2g}, |det - 2q| = {agree:.1g}"


@check("flow", "time averages converge towards 2")
def _time_average():
    ta = _flow(CONFIGS[0]).time_averages(2000.0)
    dev = float(np.max(np.abs(ta.values - 2)))
    return dev < 0.05, f"max |avg - 2| = {dev:.2g}, increments {[f'{v:.1g}' for v in ta.increments()]}"


@check("flow", "flow classification examples")
def _classify():
    a = classify_flow([1.0, math.sqrt(2.0)])
    b = classify_flow([1.0, 2.0])
    c = classify_flow([2.4])
    ok = (a.verdict is Verdict.ERGODIC_LIKELY and b.verdict is Verdict.RATIONALLY_DEPENDENT
          and (2, -1) in b.relations and c.verdict is Verdict.ERGODIC_LIKELY)
    return ok, f"(1,sqrt2): {a}; (1,2): {b}; g=1: {c}"


# --- asym ------------------------------------------------------------------
@check("asym", "regime coefficients, c < 0 and constant fit")
def _asym():
    ok = True
    for x in CONFIGS:
        s = _surface(x)
        ok &= s.c < 0
    f = Flow(_surface(CONFIGS[0], 0.7))
    e = build_expansion(f, Regime.G1_CLOSED)
    ok &= abs(e.log_coeff + (1 + 2 * 0.49) / 8) < 1e-15
    e = build_expansion(_flow(CONFIGS[1]), Regime.DIO_ERGODIC)
    ok &= abs(e.log_coeff + 2 / 8) < 1e-15
    zero_alpha = abs(_surface(CONFIGS[1]).d1) == 0.0
    r = np.geomspace(10, 1000, 12)
    fit = fit_constant(r, 7 + r ** -0.5, np.zeros_like(r))
    ok &= zero_alpha and abs(fit.drift_exponent + 0.5) < 0.1
    return ok, f"drift exponent on r^-1/2 data {fit.drift_exponent:.3g}"


# --- bessel ----------------------------------------------------------------
@check("bessel", "overlap band, kernel symmetry and diagonal limit")
def _bessel():
    worst_overlap = max(bessel.overlap_disagreement(a) for a in (-0.5, 0.0, 0.5, 1.0, 2.5))
    pts = qmc.Halton(d=2, scramble=False).random(200) * 50 + 0.01
    sym = max(abs(bessel.kernel(0.3, a, b) - bessel.kernel(0.3, b, a)) / (1 + abs(bessel.kernel(0.3, a, b)))
              for a, b in pts)
    diag = 0.0
    for xv in (0.5, 1.0, 10.0, 100.0):
        h = 1e-4 * xv
        limit = (bessel.kernel(0.3, xv - h, xv + h))
        diag = max(diag, abs(limit - bessel.kernel_diag(0.3, xv)))
    return worst_overlap < 1e-10 and sym < 1e-14 and diag < 1e-8, \
        f"overlap {worst_overlap:.2g}, symmetry {sym:.2g}, diagonal {diag:.2g}"


# --- fredholm --------------------------------------------------------------
@check("fredholm", "r=0, exact g=0 value, monotonicity")
def _fredholm():
    c0 = validate((1.0,), 0.0)
    zero = log_det(0.0, c0).log_F
    exact = abs(log_det(40.0, c0, m=16).log_F + 10.0)
    cfg = validate((1.0, 2.0, 3.0))
    values = [log_det(r, cfg, m=16).log_F for r in (1.0, 2.0, 4.0, 8.0)]
    decreasing = all(b < a for a, b in zip(values, values[1:])) and values[0] < 0
    grown = log_det(4.0, validate((1.0, 2.0, 3.2)), m=16).log_F < values[2]
    return zero == 0.0 and exact < 1e-10 and decreasing and grown, \
        f"log F(40) + 10 = {exact:.1g}, monotone in r {decreasing}, in x_3 {grown}"


def run_all():
    for module, name, fn in _REGISTRY:
        try:
            passed, detail = fn()
        except errors.BesselGapError as exc:
            passed, detail = False, exc.describe()
        yield CheckResult(module, name, bool(passed), detail)
