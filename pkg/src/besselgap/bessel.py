"""Bessel functions of the first kind of real order and the Bessel kernel.

Double-precision values come from the ascending series (summed with guard
digits, because the alternating terms grow like ``exp(z)`` before they
decay) below ``switch_point(alpha)`` and from the Hankel large-argument
expansion above it.  Passing ``dps`` returns mpmath numbers from the
series at that working precision.

The Nystrom code needs the reduced function ``E_alpha(x) = J_alpha(sqrt x) /
x**(alpha/2)``, an entire function of ``x``; it is exposed as
``reduced_besselj``.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np

from .errors import AlphaOutOfRange, NegativeArgument, NonPositiveArgument, AccuracyLoss

DIAG_EPS = 1e-6

# Lanczos approximation, g = 7, nine coefficients (about 15 significant digits).
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993, 676.5203681218851, -1259.1392167224028,
    771.32342877765313, -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
)


def log_gamma(z: float) -> float:
    """log|Gamma(z)| for real z that is not a non-positive integer."""
    if z < 0.5:
        # Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z).
        return math.log(math.pi / abs(math.sin(math.pi * z))) - log_gamma(1.0 - z)
    z -= 1.0
    acc = _LANCZOS[0]
    for k in range(1, 9):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(acc)


def _check_order(alpha):
    if not alpha > -1:
        raise AlphaOutOfRange(f"Bessel order must exceed -1, got {alpha}")


def switch_point(alpha: float) -> float:
    """Argument above which the Hankel expansion replaces the series."""
    return 25.0 + alpha * alpha


def _series_sum(alpha, x, dps):
    """sum_k (-x/4)^k / (k! (alpha+1)_k) at ``dps`` digits plus guard digits."""
    guard = int(math.sqrt(float(x)) / math.log(10)) + 8
    with mpmath.workdps(dps + guard):
        xm = -mpmath.mpf(x) / 4
        a1 = mpmath.mpf(alpha) + 1
        term = mpmath.mpf(1)
        total = term
        tiny = mpmath.mpf(10) ** (-(dps + guard))
        k = 0
        while True:
            k += 1
            term = term * xm / (k * (a1 + k - 1))
            total += term
            if k > abs(xm) and abs(term) < tiny * abs(total):
                break
        return total


def _hankel(alpha, z):
    """J_alpha(z) from the large-argument expansion, with its error estimate."""
    mu = 4.0 * alpha * alpha
    p_sum, q_sum = 0.0, 0.0
    term = 1.0
    best = math.inf
    k = 0
    while True:
        # term holds a_k(alpha) / z**k with the alternating signs folded in.
        mag = abs(term)
        if mag > best or k > 200:
            break
        best = mag
        if k % 2 == 0:
            p_sum += term if (k // 2) % 2 == 0 else -term
        else:
            q_sum += term if (k // 2) % 2 == 0 else -term
        k += 1
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        if term == 0.0:
            break
    chi = z - (0.5 * alpha + 0.25) * math.pi
    amp = math.sqrt(2.0 / (math.pi * z))
    return amp * (p_sum * math.cos(chi) - q_sum * math.sin(chi)), amp * best


def _reduced_series(alpha, x, dps):
    """E_alpha(x) = 2^-alpha S(x) / Gamma(alpha+1)."""
    s = _series_sum(alpha, x, dps if dps is not None else 17)
    if dps is None:
        return float(s) * math.exp(-alpha * math.log(2.0) - log_gamma(alpha + 1.0))
    with mpmath.workdps(dps):
        return +(s / (mpmath.mpf(2) ** alpha * mpmath.gamma(mpmath.mpf(alpha) + 1)))


def reduced_besselj(alpha, x, dps=None):
    """``J_alpha(sqrt(x)) / x**(alpha/2)`` for ``x >= 0``."""
    _check_order(alpha)
    if x < 0:
        raise NegativeArgument(f"argument must be non-negative, got {x}")
    if dps is None:
        z = math.sqrt(x)
        if z > switch_point(alpha):
            value, _ = _hankel(alpha, z)
            return value / x ** (0.5 * alpha)
        return _reduced_series(alpha, x, None)
    return _reduced_series(alpha, x, dps)


def besselj(alpha, x, dps=None):
    """J_alpha(x) for real order ``alpha > -1`` and ``x >= 0``."""
    _check_order(alpha)
    if x < 0:
        raise NegativeArgument(f"argument must be non-negative, got {x}")
    if x == 0:
        if alpha == 0:
            return 1.0 if dps is None else mpmath.mpf(1)
        if alpha > 0:
            return 0.0 if dps is None else mpmath.mpf(0)
        return math.inf if dps is None else mpmath.inf
    if dps is None:
        if x > switch_point(alpha):
            return _hankel(alpha, x)[0]
        return _reduced_series(alpha, x * x, None) * x ** alpha
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        return +(_reduced_series(alpha, xm * xm, dps) * xm ** alpha)


def besselj_prime(alpha, x, dps=None):
    """dJ_alpha/dx via ``(alpha/x) J_alpha - J_{alpha+1}``."""
    if x <= 0:
        raise NonPositiveArgument(f"derivative needs x > 0, got {x}")
    if dps is None:
        return alpha / x * besselj(alpha, x) - besselj(alpha + 1, x)
    with mpmath.workdps(dps):
        return alpha / mpmath.mpf(x) * besselj(alpha, x, dps) - besselj(alpha + 1, x, dps)


def overlap_disagreement(alpha, points=11):
    """Max relative-to-amplitude gap between series and Hankel values in the
    band ``[0.9, 1.1] * switch_point(alpha)``."""
    zs = np.linspace(0.9, 1.1, points) * switch_point(alpha)
    worst = 0.0
    for z in zs:
        series = _reduced_series(alpha, z * z, None) * z ** alpha
        hankel, err = _hankel(alpha, z)
        worst = max(worst, abs(series - hankel) / math.sqrt(2 / (math.pi * z)))
    return worst


def check_overlap(alpha, tol=1e-10):
    worst = overlap_disagreement(alpha)
    if worst > tol:
        raise AccuracyLoss(f"series and asymptotic branches differ by {worst:.3g} for alpha={alpha}",
                           invariant=f"overlap agreement {tol:g}")
    return worst


# ---------------------------------------------------------------------------
# Kernel

def _kernel_parts(alpha, x, dps=None):
    """(J_alpha(sqrt x), sqrt(x) J_{alpha+1}(sqrt x))."""
    if dps is None:
        s = math.sqrt(x)
        return besselj(alpha, s), s * besselj(alpha + 1, s)
    with mpmath.workdps(dps):
        s = mpmath.sqrt(mpmath.mpf(x))
        return besselj(alpha, s, dps), s * besselj(alpha + 1, s, dps)


def kernel_diag(alpha, x, dps=None):
    """K(x, x) = (J_a^2 + J_{a+1}^2 - (2a / sqrt x) J_a J_{a+1}) / 4."""
    _check_order(alpha)
    if x <= 0:
        raise NonPositiveArgument(f"kernel needs x > 0, got {x}")
    ja, sj1 = _kernel_parts(alpha, x, dps)
    # sj1 = sqrt(x) J_{a+1}, so J_{a+1}^2 = sj1^2 / x and J_a J_{a+1} / sqrt(x) = ja sj1 / x.
    return (ja * ja + (sj1 * sj1 - 2 * alpha * ja * sj1) / x) / 4


def kernel(alpha, x, y, dps=None):
    """Bessel kernel K(x, y) for x, y > 0."""
    _check_order(alpha)
    if x <= 0 or y <= 0:
        raise NonPositiveArgument(f"kernel needs positive arguments, got ({x}, {y})")
    if abs(x - y) < DIAG_EPS * max(x, 1.0):
        # K is even in (x - y) about the midpoint, so the midpoint diagonal
        # is accurate to O((x - y)^2).
        return kernel_diag(alpha, (x + y) / 2, dps)
    ja_x, sj1_x = _kernel_parts(alpha, x, dps)
    ja_y, sj1_y = _kernel_parts(alpha, y, dps)
    return (sj1_x * ja_y - ja_x * sj1_y) / (2 * (x - y))
