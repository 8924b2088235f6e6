"""r-independent quantities of the hyperelliptic surface y^2 = R(z).

``R(z) = prod_k (z + x_k)`` has branch points ``-x_1 > -x_2 > ... > -x_{2g+1}``
and infinity.  On the real axis the segments alternate between *cuts*
``(-x_{2j}, -x_{2j-1})`` (plus the unbounded one left of ``-x_{2g+1}``), where
the sheets are glued, and *gaps* ``(-x_{2j+1}, -x_{2j})``, where ``sqrt R`` is
real.  The first-sheet branch is positive on ``(-x_1, inf)`` and picks up one
sign flip per cut when continued through the upper half plane.

Conventions used throughout (all verified by ``surface_invariants``):

* gap integrals  ``G[k, p] = int_gap_k s**p / sqrt|R| ds``
* cut integrals  ``C[k, p] = int_cut_k s**p / sqrt|R| ds``
* A-periods      ``a[i, p] = -2 sum_{k >= i} (-1)**k G[k, p]``
* B-periods      ``b[i, p] = 2i (-1)**(i+1) C[i, p]``
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import errors
from .quadrature import DEFAULT_ORDER, DEFAULT_RTOL, integrate_inverse_sqrt, integrate_smooth

SYMMETRY_TOL = 1e-8


@dataclass(frozen=True)
class Configuration:
    """Interval endpoints ``0 < x_1 < ... < x_{2g+1}`` and Bessel order ``alpha``."""

    x: tuple
    alpha: float = 0.0

    def __post_init__(self):
        try:
            x = tuple(float(v) for v in np.atleast_1d(np.asarray(self.x, dtype=float)))
        except (TypeError, ValueError) as exc:
            raise errors.InvalidConfiguration(f"endpoints must be real numbers: {exc}") from None
        alpha = float(self.alpha)
        if len(x) % 2 == 0:
            raise errors.EvenEndpointCount(f"need an odd number of endpoints, got {len(x)}")
        if not all(np.isfinite(x)) or not np.isfinite(alpha):
            raise errors.InvalidConfiguration("endpoints and alpha must be finite")
        if x[0] <= 0:
            raise errors.NonPositiveEndpoint(f"x_1 must be positive, got {x[0]}")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise errors.NonIncreasingEndpoints(f"endpoints must increase strictly: {x}")
        if not alpha > -1:
            raise errors.AlphaOutOfRange(f"alpha must exceed -1, got {alpha}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "alpha", alpha)

    @property
    def g(self) -> int:
        return (len(self.x) - 1) // 2

    def gap(self, k):
        """Gap ``k`` (1-based) as ``(left, right)``."""
        return -self.x[2 * k], -self.x[2 * k - 1]

    def cut(self, k):
        """Bounded cut ``k`` (1-based) as ``(left, right)``."""
        return -self.x[2 * k - 1], -self.x[2 * k - 2]

    def intervals(self):
        """The gap set ``(0, x_1), (x_2, x_3), ...`` on the positive axis."""
        x = self.x
        return [(0.0, x[0])] + [(x[2 * k - 1], x[2 * k]) for k in range(1, self.g + 1)]


def validate(x, alpha=0.0) -> Configuration:
    return Configuration(tuple(x), alpha)


def _product_without(s, x, skip):
    s = np.asarray(s, dtype=float)
    out = np.ones_like(s)
    for idx, xv in enumerate(x):
        if idx not in skip:
            out = out * (s + xv)
    return out


def sqrtR_sheet1(s: float, config: Configuration) -> float:
    """First-sheet value of sqrt(R(s)) at a real point off the cuts."""
    x = config.x
    s = float(s)
    if s > -x[0]:
        return float(np.sqrt(np.prod([s + v for v in x])))
    for k in range(1, config.g + 1):
        left, right = config.gap(k)
        if left < s < right:
            return float((-1) ** k * np.sqrt(abs(np.prod([s + v for v in x]))))
    if s in [-v for v in x]:
        return 0.0
    raise errors.PointOnCut(f"s={s} lies on a branch cut of sqrt(R)")


def _segment_moments(config, left, right, skip, powers, order, rtol):
    """int s**p / sqrt|R| over a segment whose two ends are branch points."""
    x = config.x

    def integrand(s):
        base = 1.0 / np.sqrt(np.abs(_product_without(s, x, skip)))
        return base[:, None] * s[:, None] ** powers[None, :]

    return integrate_inverse_sqrt(integrand, left, right, order=order, rtol=rtol)


def gap_moments(config, order=DEFAULT_ORDER, rtol=DEFAULT_RTOL):
    """``G[k-1, p]`` for gaps k=1..g and powers p=0..g."""
    g = config.g
    powers = np.arange(g + 1)
    return np.array([_segment_moments(config, *config.gap(k), {2 * k - 1, 2 * k}, powers, order, rtol)
                     for k in range(1, g + 1)]).reshape(g, g + 1)


def cut_moments(config, order=DEFAULT_ORDER, rtol=DEFAULT_RTOL):
    """``C[k-1, p]`` for bounded cuts k=1..g and powers p=0..g."""
    g = config.g
    powers = np.arange(g + 1)
    return np.array([_segment_moments(config, *config.cut(k), {2 * k - 2, 2 * k - 1}, powers, order, rtol)
                     for k in range(1, g + 1)]).reshape(g, g + 1)


def a_matrix(config, order=DEFAULT_ORDER, rtol=DEFAULT_RTOL):
    """A-periods split as ``(A, a_last, A_hat)``."""
    g = config.g
    if g == 0:
        empty = np.zeros((0, 0))
        return empty, np.zeros(0), empty
    gaps = gap_moments(config, order, rtol)
    signed = gaps * ((-1.0) ** np.arange(1, g + 1))[:, None]
    # Row i sums gaps i..g: reverse cumulative sum.
    full = -2.0 * np.cumsum(signed[::-1], axis=0)[::-1]
    return full[:, :g].copy(), full[:, g].copy(), full[:, 1:].copy()


def b_periods(config, order=DEFAULT_ORDER, rtol=DEFAULT_RTOL):
    """``g x (g+1)`` complex matrix of B-periods of ``s**p ds / sqrt R``."""
    g = config.g
    if g == 0:
        return np.zeros((0, 1), dtype=complex)
    cuts = cut_moments(config, order, rtol)
    signs = 2j * (-1.0) ** np.arange(2, g + 2)
    return signs[:, None] * cuts


def _solve(A, rhs):
    try:
        if A.size and np.linalg.cond(A) > 1e14:
            raise np.linalg.LinAlgError("ill-conditioned")
        return np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise errors.SingularPeriodMatrix(f"A-period matrix is singular: {exc}") from None


def q_polynomial(A, a_last):
    """``(q_0..q_{g-1}) = -A^{-1} a_last / 2``; q has leading coefficient 1/2."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros(0)
    return -0.5 * _solve(A, np.asarray(a_last, dtype=float))


def q_eval(q_coeffs, z):
    """Evaluate ``q(z) = z**g / 2 + sum_j q_j z**j``."""
    z = np.asarray(z)
    coeffs = np.append(np.asarray(q_coeffs, dtype=float), 0.5)
    return np.polynomial.polynomial.polyval(z, coeffs)


def c_const(config, q_coeffs):
    lead = q_coeffs[-1] if len(q_coeffs) else 0.0
    return float(lead - 0.25 * sum(config.x))


def omega_vector(config, q_coeffs, order=DEFAULT_ORDER, rtol=DEFAULT_RTOL, cuts=None):
    """Frequencies ``Omega_j = 2 (-1)**(j+1) int_cut_j q / sqrt|R|``."""
    g = config.g
    if g == 0:
        return np.zeros(0)
    if cuts is None:
        cuts = cut_moments(config, order, rtol)
    coeffs = np.append(np.asarray(q_coeffs, dtype=float), 0.5)
    omega = 2.0 * (-1.0) ** np.arange(2, g + 2) * (cuts @ coeffs)
    if np.any(omega <= 0):
        raise errors.NonPositiveOmega(f"frequencies must be positive, got {omega}")
    return omega


def tau_matrix(config, A, order=DEFAULT_ORDER, rtol=DEFAULT_RTOL, bper=None, tol=SYMMETRY_TOL):
    """Period matrix of the A-normalised holomorphic differentials."""
    g = config.g
    if g == 0:
        return np.zeros((0, 0), dtype=complex)
    if bper is None:
        bper = b_periods(config, order, rtol)
    # tau = B_g A^{-1}; solve with the transpose to avoid forming the inverse.
    tau = _solve(np.asarray(A).T, bper[:, :g].T).T
    asym = np.max(np.abs(tau - tau.T))
    if asym > tol * max(1.0, np.max(np.abs(tau))):
        raise errors.AsymmetricTau(f"tau symmetry residual {asym:.3g}")
    tau = 0.5 * (tau + tau.T)
    if np.min(np.linalg.eigvalsh(tau.imag)) <= 0:
        raise errors.NonPositiveDefiniteTau("Im tau is not positive definite")
    return tau


def _half_line_moments(config, powers):
    """``int_{-x_1}^0 s**p / sqrt R ds`` via ``s = -x_1 + v**2``."""
    x = config.x

    def integrand(v):
        s = -x[0] + v * v
        rest = np.sqrt(_product_without(s, x, {0}))
        return (2.0 / rest)[:, None] * s[:, None] ** powers[None, :]

    return integrate_smooth(integrand, 0.0, np.sqrt(x[0]))


def a0_and_alpha_tilde(config, A, order=DEFAULT_ORDER, rtol=DEFAULT_RTOL, gaps=None, a_last=None):
    """Return ``(a0, alpha_tilde, d1)``.

    ``a0[j-1]`` is the real part of ``-2 int_{-x_{2g+1}}^{0} s**(j-1) / sqrt R``
    along the upper side of the first sheet; cuts contribute only imaginary
    parts, so it is a signed sum of gap integrals plus the ``(-x_1, 0)`` piece.
    """
    g = config.g
    alpha = config.alpha
    powers = np.arange(g + 1)
    total = _half_line_moments(config, powers)
    if g:
        if gaps is None:
            gaps = gap_moments(config, order, rtol)
        total = total + ((-1.0) ** np.arange(1, g + 1)) @ gaps
    a0 = -2.0 * total
    alpha_tilde = np.empty(g + 1)
    alpha_tilde[0] = alpha / 2
    if g:
        alpha_tilde[1:] = -(alpha / 2) * _solve(np.asarray(A).T, a0[:g])
        if a_last is None:
            a_last = a_matrix(config, order, rtol)[1]
        last_column = np.concatenate([[a0[g]], a_last])
    else:
        last_column = a0[-1:]
    d1 = 0.5 * float(alpha_tilde @ last_column)
    return a0, alpha_tilde, d1


def t_matrix(A, A_hat):
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros((0, 0))
    return _solve(A.T, np.asarray(A_hat, dtype=float).T).T


@dataclass(frozen=True)
class SurfaceData:
    config: Configuration
    A: np.ndarray
    a_last: np.ndarray
    A_hat: np.ndarray
    A_inv: np.ndarray
    b_periods: np.ndarray
    q_coeffs: np.ndarray
    c: float
    Omega: np.ndarray
    tau: np.ndarray
    a0: np.ndarray
    alpha_tilde: np.ndarray
    d1: float
    T: np.ndarray
    gap_moments: np.ndarray = field(repr=False)
    cut_moments: np.ndarray = field(repr=False)

    @property
    def g(self):
        return self.config.g

    def q(self, z):
        return q_eval(self.q_coeffs, z)

    def nu(self, r):
        return nu(r, self)


def build_surface(config: Configuration, order=DEFAULT_ORDER, rtol=DEFAULT_RTOL) -> SurfaceData:
    g = config.g
    gaps = gap_moments(config, order, rtol) if g else np.zeros((0, 1))
    cuts = cut_moments(config, order, rtol) if g else np.zeros((0, 1))
    if g:
        signed = gaps * ((-1.0) ** np.arange(1, g + 1))[:, None]
        full = -2.0 * np.cumsum(signed[::-1], axis=0)[::-1]
        A, a_last, A_hat = full[:, :g].copy(), full[:, g].copy(), full[:, 1:].copy()
        bper = 2j * ((-1.0) ** np.arange(2, g + 2))[:, None] * cuts
    else:
        A = A_hat = np.zeros((0, 0))
        a_last = np.zeros(0)
        bper = np.zeros((0, 1), dtype=complex)
    q = q_polynomial(A, a_last)
    a0, alpha_tilde, d1 = a0_and_alpha_tilde(config, A, order, rtol, gaps=gaps, a_last=a_last)
    arrays = dict(
        A=A, a_last=a_last, A_hat=A_hat,
        A_inv=np.linalg.inv(A) if g else np.zeros((0, 0)),
        b_periods=bper, q_coeffs=q,
        Omega=omega_vector(config, q, cuts=cuts),
        tau=tau_matrix(config, A, bper=bper),
        a0=a0, alpha_tilde=alpha_tilde, T=t_matrix(A, A_hat),
        gap_moments=gaps, cut_moments=cuts,
    )
    for arr in arrays.values():
        arr.setflags(write=False)
    c = c_const(config, q)
    if not c < 0:
        raise errors.AccuracyLoss(f"linear coefficient c = {c:.6g} is not negative",
                                  invariant="c < 0")
    return SurfaceData(config=config, c=c, d1=d1, **arrays)


def nu(r, surface: SurfaceData):
    """Phase vector ``nu_j(r) = -alpha_tilde_j - Omega_j sqrt(r) / (2 pi)`` (not reduced)."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise errors.NegativeR(f"r must be non-negative, got {r}")
    root = np.sqrt(r_arr)[..., None]
    return -surface.alpha_tilde[1:] - surface.Omega * root / (2 * np.pi)


def surface_invariants(surface: SurfaceData, n_points=20):
    """Residuals of the identities the surface quantities must satisfy."""
    cfg, g = surface.config, surface.g
    out = {}
    if g == 0:
        return out
    omega = surface.Omega
    out["omega_inverse_row"] = float(np.max(np.abs(4 * np.pi * surface.A_inv[-1] - omega)) / np.max(omega))
    lo, hi = -cfg.x[-1] - 1.0, 1.0
    k = np.arange(n_points)
    zs = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos((2 * k + 1) * np.pi / (2 * n_points))
    charpoly = np.poly(surface.T)
    twice_q = 2 * surface.q(zs)
    out["charpoly"] = float(np.max(np.abs(np.polyval(charpoly, zs) - twice_q)) / np.max(np.abs(twice_q)))
    raw_tau = surface.b_periods[:, :g] @ surface.A_inv
    out["tau_symmetry"] = float(np.max(np.abs(raw_tau - raw_tau.T)))
    out["tau_min_eig"] = float(np.min(np.linalg.eigvalsh(surface.tau.imag)))
    out["tau_real_part"] = float(np.max(np.abs(surface.tau.real)))
    out["normalization"] = float(np.max(np.abs(surface.A @ surface.A_inv - np.eye(g))))
    coeffs = np.append(surface.q_coeffs, 0.5)
    gap_q = surface.gap_moments @ coeffs
    scale = np.abs(surface.gap_moments) @ np.abs(coeffs)
    out["gap_vanishing"] = float(np.max(np.abs(gap_q) / scale))
    roots = np.sort(np.roots(coeffs[::-1]).real)[::-1]
    inside = [cfg.gap(j)[0] < roots[j - 1] < cfg.gap(j)[1] for j in range(1, g + 1)]
    out["q_roots_in_gaps"] = float(all(inside))
    return out
