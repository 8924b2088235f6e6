"""Quadrature rules used across the package.

Two families are needed.  The cos-substitution rule integrates
``f(s) / sqrt((b - s)(s - a))`` over ``(a, b)``: with ``s = m + h cos(theta)``
the weight disappears and the trapezoid-like midpoint rule in ``theta`` is
Gauss-Chebyshev, exact for polynomial ``f`` up to degree ``2n - 1``.
Legendre (and Jacobi, for a power weight at one end) rules handle smooth
integrands; they come from numpy/scipy in double precision and are refined
by Newton iteration when an mpmath working precision is requested.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .errors import QuadratureNotConverged

DEFAULT_ORDER = 200
MAX_ORDER = 6400
DEFAULT_RTOL = 1e-12


class RuleKind(Enum):
    COS_SUBSTITUTION = "cos-substitution"
    LEGENDRE = "legendre"


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on the reference interval (-1, 1)."""

    kind: RuleKind
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("a quadrature rule needs at least two nodes")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    def mapped(self, a, b):
        """Nodes and weights transported to ``(a, b)``.

        For the cos-substitution rule the returned weights already absorb the
        inverse-square-root factor, so ``sum(w * f(s))`` approximates
        ``int_a^b f(s) / sqrt((b - s)(s - a)) ds``.
        """
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        s = mid + half * self.nodes
        if self.kind is RuleKind.COS_SUBSTITUTION:
            return s, self.weights
        return s, half * self.weights


@lru_cache(maxsize=64)
def cos_rule(order: int) -> QuadratureRule:
    theta = (2.0 * np.arange(1, order + 1) - 1.0) * np.pi / (2.0 * order)
    return QuadratureRule(RuleKind.COS_SUBSTITUTION, order, np.cos(theta),
                          np.full(order, np.pi / order))


@lru_cache(maxsize=64)
def legendre_rule(order: int) -> QuadratureRule:
    t, w = leggauss(order)
    return QuadratureRule(RuleKind.LEGENDRE, order, t, w)


def integrate_inverse_sqrt(func, a, b, *, order=DEFAULT_ORDER, rtol=DEFAULT_RTOL,
                           max_order=MAX_ORDER):
    """``int_a^b func(s) / sqrt((b - s)(s - a)) ds`` with order doubling.

    ``func`` maps an array of nodes of shape ``(n,)`` to an array of shape
    ``(n, ...)``; every component is integrated at once.  Convergence is
    judged against the integral of ``|func|`` so that components which are
    zero by cancellation do not stall the doubling.
    """
    previous = None
    while order <= max_order:
        s, w = cos_rule(order).mapped(a, b)
        values = np.asarray(func(s))
        weights = w.reshape((-1,) + (1,) * (values.ndim - 1))
        current = np.sum(weights * values, axis=0)
        if previous is not None:
            scale = np.sum(weights * np.abs(values), axis=0)
            if np.all(np.abs(current - previous) <= rtol * np.maximum(scale, 1e-300)):
                return current
        previous = current
        order *= 2
    raise QuadratureNotConverged(
        f"cos-substitution rule on ({a:.6g}, {b:.6g}) not converged at {max_order} nodes",
        invariant=f"successive doublings agree to {rtol:g}")


def integrate_smooth(func, a, b, *, order=32, rtol=DEFAULT_RTOL, max_order=MAX_ORDER):
    """Gauss-Legendre integral of a smooth vector-valued ``func`` on ``(a, b)``."""
    previous = None
    while order <= max_order:
        s, w = legendre_rule(order).mapped(a, b)
        values = np.asarray(func(s))
        weights = w.reshape((-1,) + (1,) * (values.ndim - 1))
        current = np.sum(weights * values, axis=0)
        if previous is not None:
            scale = np.sum(weights * np.abs(values), axis=0)
            if np.all(np.abs(current - previous) <= rtol * np.maximum(scale, 1e-300)):
                return current
        previous = current
        order *= 2
    raise QuadratureNotConverged(
        f"Legendre rule on ({a:.6g}, {b:.6g}) not converged at {max_order} nodes",
        invariant=f"successive doublings agree to {rtol:g}")


# ---------------------------------------------------------------------------
# Rules on (0, 1) carrying an optional power weight t**alpha.  These feed the
# Nystrom discretisation, which may run in mpmath precision.


def _jacobi_recurrence(n, a, b, t):
    """P_n^{(a,b)}(t) and its derivative by the three-term recurrence."""
    p_prev, p = 1, (a - b) / 2 + (a + b + 2) * t / 2
    if n == 0:
        return 1, 0
    for k in range(2, n + 1):
        c = 2 * k + a + b
        a1 = 2 * k * (k + a + b) * (c - 2)
        a2 = (c - 1) * (a * a - b * b)
        a3 = (c - 2) * (c - 1) * c
        a4 = 2 * (k + a - 1) * (k + b - 1) * c
        p_prev, p = p, ((a2 + a3 * t) * p - a4 * p_prev) / a1
    c = 2 * n + a + b
    dp = (n * (a - b - c * t) * p + 2 * (n + a) * (n + b) * p_prev) / (c * (1 - t * t))
    return p, dp


@lru_cache(maxsize=128)
def _unit_rule_mp(order, alpha, dps):
    """Gauss rule for ``int_0^1 t**alpha f(t) dt`` at ``dps`` digits."""
    with mpmath.workdps(dps + 10):
        a = mpmath.mpf(0)
        b = mpmath.mpf(alpha)
        if alpha == 0:
            seeds, _ = leggauss(order)
        else:
            seeds, _ = roots_jacobi(order, 0.0, float(alpha))
        nodes, weights = [], []
        log_const = ((a + b + 1) * mpmath.log(2) + mpmath.loggamma(order + a + 1)
                     + mpmath.loggamma(order + b + 1) - mpmath.loggamma(order + 1)
                     - mpmath.loggamma(order + a + b + 1))
        const = mpmath.exp(log_const)
        for seed in seeds:
            t = mpmath.mpf(seed)
            for _ in range(100):
                p, dp = _jacobi_recurrence(order, a, b, t)
                step = p / dp
                t -= step
                if abs(step) < mpmath.mpf(10) ** (-(dps + 8)):
                    break
            p, dp = _jacobi_recurrence(order, a, b, t)
            w = const / ((1 - t * t) * dp * dp)
            # Move (-1, 1) with weight (1+t)^alpha to (0, 1) with weight u^alpha.
            nodes.append((t + 1) / 2)
            weights.append(w / mpmath.mpf(2) ** (b + 1))
    with mpmath.workdps(dps):
        return tuple(+v for v in nodes), tuple(+v for v in weights)


def unit_rule(order, alpha=0.0, dps=None):
    """Gauss rule on ``(0, 1)`` for the weight ``t**alpha``.

    Returns numpy float arrays when ``dps`` is None, otherwise tuples of
    mpmath numbers accurate to ``dps`` digits.
    """
    if dps is None:
        if alpha == 0:
            t, w = leggauss(order)
            return (t + 1) / 2, w / 2
        # scipy's Jacobi nodes lose a few digits for negative exponents, so
        # the double rule is the Newton-refined one rounded to float.
        t, w = _unit_rule_mp(order, float(alpha), 20)
        return np.array([float(v) for v in t]), np.array([float(v) for v in w])
    return _unit_rule_mp(order, float(alpha), int(dps))
