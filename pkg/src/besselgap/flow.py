"""Objects living on the torus R^g / Z^g.

The central computation is the divisor ``b(u)``: for each ``u`` the monic
polynomial ``P(s) = prod_k (s - b_k(u))`` equals

    theta(0)^2 / theta(u)^2
      * theta(phi(s) + e1/2 + u) theta(-phi(s) + e1/2 + u)
      / (theta(phi(s) + e1/2) theta(-phi(s) + e1/2))
      * prod_k (s + x_{2k})

with ``phi`` the upper-side Abel map.  Evaluating the right side at ``g+1``
points inside the gaps fixes the ``g`` free coefficients; the roots then
give ``b(u)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import qmc

from . import errors
from .abel import AbelMap
from .surface import SurfaceData
from .theta import ThetaEvaluator

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SNAP_TOL = 1e-8
PANEL_ORDER = 16
_BATCH = 20000


@dataclass(frozen=True)
class TorusPoint:
    u: tuple

    def __post_init__(self):
        u = np.mod(np.atleast_1d(np.asarray(self.u, dtype=float)), 1.0)
        u[u >= 1.0] = 0.0  # mod can round up to exactly 1
        object.__setattr__(self, "u", tuple(float(v) for v in u))

    def as_array(self):
        return np.array(self.u, dtype=float)


@dataclass(frozen=True)
class DivisorPoints:
    b: tuple


class Verdict(Enum):
    ERGODIC_LIKELY = "ergodic-likely"
    RATIONALLY_DEPENDENT = "rationally-dependent"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FlowClass:
    verdict: Verdict
    relations: tuple
    search_bound: int
    note: str = ""

    def __str__(self):
        text = self.verdict.value
        if self.note:
            text += f" ({self.note})"
        if self.relations:
            text += " relations: " + ", ".join(str(tuple(int(v) for v in n)) for n in self.relations)
        return text


@dataclass(frozen=True)
class TimeAverage:
    """Finite-time averages of B(-x_j, nu(t^2)) for every endpoint j."""

    T: float
    values: np.ndarray
    history: tuple = field(default=())  # ((T/4, values), (T/2, values), (T, values))

    def increments(self):
        vals = [v for _, v in self.history]
        return [np.max(np.abs(b - a)) for a, b in zip(vals, vals[1:])]


@dataclass(frozen=True)
class SpaceAverage:
    z: np.ndarray
    estimate: np.ndarray
    stderr: np.ndarray
    n_samples: int


def _as_torus_array(u, g):
    if isinstance(u, TorusPoint):
        u = u.as_array()
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        u = u.reshape(1)
    return u.reshape(-1, g) if g else u.reshape(-1, 0)


class Flow:
    """Divisor points, the function B(z, u) and its averages for one surface."""

    def __init__(self, surface: SurfaceData, theta: ThetaEvaluator | None = None,
                 abel: AbelMap | None = None, node_shift: float = 0.0):
        self.surface = surface
        self.config = surface.config
        g = surface.g
        self.theta = theta if theta is not None else ThetaEvaluator(surface.tau)
        self.abel = abel if abel is not None else AbelMap(surface)
        self.node_shift = node_shift
        if g:
            self._setup_nodes()

    @property
    def g(self):
        return self.surface.g

    # --- interpolation nodes -------------------------------------------------
    def _setup_nodes(self):
        g = self.g
        x = self.config.x
        e1 = np.eye(g)[0]
        theta0 = self.theta(np.zeros(g)).real
        nodes, phis, dens, prods = [], [], [], []
        for i in range(g + 1):
            k = i % g + 1
            left, right = self.config.gap(k)
            for attempt in range(6):
                frac = (0.5 + (i + 1) * GOLDEN + self.node_shift + attempt * GOLDEN ** 3) % 1.0
                s = left + (right - left) * (0.1 + 0.8 * frac)
                phi = self.abel(s)
                den = self.theta(phi + e1 / 2) * self.theta(-phi + e1 / 2)
                if abs(den) > 1e-10 * theta0 ** 2:
                    break
            else:
                raise errors.ThetaDenominatorVanishes(
                    f"theta(phi + e1/2) vanishes near every node tried in gap {k}")
            nodes.append(s)
            phis.append(phi)
            dens.append(den)
            prods.append(np.prod([s + x[2 * m - 1] for m in range(1, g + 1)]))
        self.nodes = np.array(nodes)
        self._phis = np.array(phis)
        self._dens = np.array(dens)
        self._prods = np.array(prods)
        self._theta0_sq = theta0 ** 2
        vander = self.nodes[:, None] ** np.arange(g)[None, :]
        self._pinv = np.linalg.pinv(vander)
        self._lead = self.nodes ** g
        self._half_e1 = e1 / 2
        lo = np.array([self.config.gap(k)[0] for k in range(1, g + 1)])
        hi = np.array([self.config.gap(k)[1] for k in range(1, g + 1)])
        self._gap_lo, self._gap_hi = lo, hi

    # --- divisor points -------------------------------------------------------
    def _poly_coeffs(self, U):
        """Low-order coefficients of the monic divisor polynomial for each row of U."""
        shifted_plus = self._phis[None, :, :] + self._half_e1 + U[:, None, :]
        shifted_minus = -self._phis[None, :, :] + self._half_e1 + U[:, None, :]
        num = self.theta(shifted_plus) * self.theta(shifted_minus)
        theta_u = self.theta(U.astype(complex))
        values = (self._theta0_sq / theta_u ** 2)[:, None] * num / self._dens[None, :] * self._prods[None, :]
        return (values.real - self._lead[None, :]) @ self._pinv.T

    def _roots(self, coeffs):
        g = self.g
        if g == 1:
            roots = -coeffs[:, :1]
        elif g == 2:
            c0, c1 = coeffs[:, 0], coeffs[:, 1]
            disc = c1 * c1 - 4 * c0
            if np.any(disc < -1e-12 * (c1 * c1 + abs(c0))):
                raise errors.RootOutsideInterval("divisor polynomial has complex roots")
            root = np.sqrt(np.maximum(disc, 0.0))
            big = -0.5 * (c1 + np.copysign(root, c1))
            safe = np.where(big == 0, 1.0, big)
            other = np.where(big == 0, 0.0, c0 / safe)
            roots = np.stack([np.maximum(big, other), np.minimum(big, other)], axis=1)
        else:
            comp = np.zeros((len(coeffs), g, g))
            comp[:, 1:, :-1] = np.eye(g - 1)
            comp[:, :, -1] = -coeffs
            eig = np.linalg.eigvals(comp)
            if np.any(np.abs(eig.imag) > 1e-7 * (1 + np.abs(eig.real))):
                raise errors.RootOutsideInterval("divisor polynomial has complex roots")
            roots = -np.sort(-eig.real, axis=1)
        # Gap 1 is the rightmost, so roots sorted descending line up with gaps.
        lo, hi = self._gap_lo, self._gap_hi
        width = hi - lo
        low_miss = roots < lo - SNAP_TOL * np.maximum(1, width)
        high_miss = roots > hi + SNAP_TOL * np.maximum(1, width)
        if np.any(low_miss | high_miss):
            bad = np.argwhere(low_miss | high_miss)[0]
            raise errors.RootOutsideInterval(
                f"b_{bad[1] + 1} = {roots[tuple(bad)]:.12g} outside "
                f"[{lo[bad[1]]:.6g}, {hi[bad[1]]:.6g}]")
        return np.clip(roots, lo, hi)

    def divisor_array(self, U):
        """b(u) for a batch ``U`` of shape ``(n, g)``; returns ``(n, g)``."""
        g = self.g
        U = _as_torus_array(U, g)
        if g == 0:
            return np.zeros((len(U), 0))
        out = np.empty((len(U), g))
        for start in range(0, len(U), _BATCH):
            block = U[start:start + _BATCH]
            out[start:start + _BATCH] = self._roots(self._poly_coeffs(block))
        return out

    def divisor_points(self, u) -> DivisorPoints:
        return DivisorPoints(tuple(float(v) for v in self.divisor_array(u)[0]))

    # --- B(z, u) --------------------------------------------------------------
    def _check_q(self, z):
        q = self.surface.q(np.asarray(z, dtype=float))
        scale = np.polynomial.polynomial.polyval(np.abs(z), np.abs(np.append(self.surface.q_coeffs, 0.5)))
        if np.any(np.abs(q) <= 1e-14 * scale):
            raise errors.EvaluationAtRootOfQ(f"q vanishes at z={z}")
        return q

    def B_eval(self, z, u):
        """B(z, u) = prod_k (z - b_k(u)) / q(z)."""
        q = self._check_q(z)
        if self.g == 0:
            return 2.0
        b = self.divisor_array(u)[0]
        return float(np.prod(z - b) / q)

    def B_matrix(self, z_values, U):
        """B(z_i, u_n) as an ``(n, len(z_values))`` array."""
        z_values = np.atleast_1d(np.asarray(z_values, dtype=float))
        q = self._check_q(z_values)
        U = _as_torus_array(U, self.g)
        if self.g == 0:
            return np.full((len(U), len(z_values)), 2.0)
        b = self.divisor_array(U)
        return np.prod(z_values[None, :, None] - b[:, None, :], axis=2) / q[None, :]

    def endpoint_B(self, t):
        """B(-x_j, nu(t^2)) for every endpoint j at the times ``t``."""
        t = np.asarray(t, dtype=float)
        phases = -self.surface.alpha_tilde[1:][None, :] - np.outer(t, self.surface.Omega) / (2 * np.pi)
        return self.B_matrix(-np.asarray(self.config.x), np.mod(phases, 1.0))

    # --- integrals along the flow ---------------------------------------------
    def _panel_rule(self, a, b, order=PANEL_ORDER, panels=None):
        omega_max = float(np.max(self.surface.Omega))
        if panels is None:
            panels = max(1, math.ceil((b - a) * 4 * omega_max / math.pi))
        edges = np.linspace(a, b, panels + 1)
        t, w = leggauss(order)
        half = 0.5 * np.diff(edges)
        mids = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mids[:, None] + half[:, None] * t[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        return nodes, weights, panels

    def oscillatory_integrals(self, M, r, rtol=1e-6):
        """``int_M^r B(-x_j, nu(t)) dt / t`` for every endpoint j.

        With ``t = s^2`` the integrand becomes ``2 B(-x_j, nu(s^2)) / s``,
        almost periodic in ``s``; fixed Legendre panels resolve its fastest
        phase.  The order-16 result is checked against an order-8 one.
        """
        if M <= 0:
            raise ValueError("M must be positive")
        if r < 0:
            raise errors.NegativeR(f"r must be non-negative, got {r}")
        n_end = len(self.config.x)
        if r == M:
            return np.zeros(n_end)
        if self.g == 0:
            return np.full(n_end, 2.0 * math.log(r / M))
        a, b = math.sqrt(M), math.sqrt(r)
        panels = None
        for _ in range(4):
            fine_s, fine_w, panels = self._panel_rule(a, b, panels=panels)
            coarse_s, coarse_w, _ = self._panel_rule(a, b, order=PANEL_ORDER // 2, panels=panels)
            fine = (fine_w * 2 / fine_s) @ self.endpoint_B(fine_s)
            coarse = (coarse_w * 2 / coarse_s) @ self.endpoint_B(coarse_s)
            if np.all(np.abs(fine - coarse) <= rtol * np.maximum(np.abs(fine), 1e-12)):
                return fine
            panels *= 2
        raise errors.QuadratureNotConverged(
            f"oscillatory integral not converged with {panels} panels",
            invariant=f"relative tolerance {rtol:g}")

    def oscillatory_integral(self, j, M, r):
        return float(self.oscillatory_integrals(M, r)[j - 1])

    def time_averages(self, T_max) -> TimeAverage:
        """(1/T) int_0^T B(-x_j, nu(t^2)) dt at T_max/4, T_max/2 and T_max."""
        n_end = len(self.config.x)
        if self.g == 0:
            vals = np.full(n_end, 2.0)
            return TimeAverage(T_max, vals, tuple((T_max / 2 ** k, vals) for k in (2, 1, 0)))
        omega_max = float(np.max(self.surface.Omega))
        panels = 4 * max(1, math.ceil(T_max * omega_max / math.pi))
        t, w, _ = self._panel_rule(0.0, T_max, panels=panels)
        per_panel = (w[:, None] * self.endpoint_B(t)).reshape(panels, PANEL_ORDER, n_end).sum(axis=1)
        cumulative = np.cumsum(per_panel, axis=0)
        history = []
        for k in (2, 1, 0):
            T = T_max / 2 ** k
            history.append((T, cumulative[panels // 2 ** k - 1] / T))
        return TimeAverage(T_max, history[-1][1], tuple(history))

    def time_average(self, j, T_max):
        return float(self.time_averages(T_max).values[j - 1])

    def space_average_poly(self, z, n_samples=2 ** 14, batches=16) -> SpaceAverage:
        """Quasi-Monte Carlo torus average of ``prod_k (z - b_k(u))``.

        The sample is an unscrambled Sobol set shifted (mod 1) by ``batches``
        fixed Kronecker offsets; the spread of the batch means gives the
        standard error.  Nothing is random, so results are reproducible.
        """
        z = np.atleast_1d(np.asarray(z, dtype=float))
        g = self.g
        if g == 0:
            return SpaceAverage(z, np.ones_like(z), np.zeros_like(z), 0)
        per_batch = max(2, n_samples // batches)
        per_batch = 1 << (per_batch - 1).bit_length()
        base = qmc.Sobol(d=g, scramble=False).random(per_batch)
        irrational = np.sqrt(np.array([2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37][:g], dtype=float)) % 1.0
        means, scale = [], np.zeros_like(z)
        for k in range(batches):
            shift = ((k + 1) * irrational) % 1.0
            b = self.divisor_array((base + shift) % 1.0)
            values = np.prod(z[None, :, None] - b[:, None, :], axis=2)
            means.append(values.mean(axis=0))
            scale = np.maximum(scale, np.abs(values).max(axis=0))
        means = np.array(means)
        spread = means.std(axis=0, ddof=1) / math.sqrt(batches)
        # For g=1 the Sobol set is an equispaced grid and the average is exact
        # up to rounding, so the batch spread alone would understate the error.
        floor = 1e-12 * scale
        return SpaceAverage(z, means.mean(axis=0), np.hypot(spread, floor), per_batch * batches)


def classify_flow(Omega, N=1000, rel_tol=1e-10, max_candidates=10 ** 8) -> FlowClass:
    """Search integer vectors ``0 < |n|_inf <= N`` for ``|n . Omega|`` small.

    The first ``g-1`` components are enumerated and the last is taken as the
    best rounding, which finds every relation the exhaustive search would.
    The verdict is heuristic: rational independence cannot be decided in
    floating point and no Diophantine constants are estimated.
    """
    omega = np.asarray(Omega, dtype=float)
    g = len(omega)
    if g <= 1:
        return FlowClass(Verdict.ERGODIC_LIKELY, (), N, f"g={g}: automatic")
    if (2 * N + 1) ** (g - 1) > max_candidates:
        raise errors.SearchBoundTooLarge(f"(2N+1)^(g-1) = {(2 * N + 1) ** (g - 1)} candidates")
    norm_omega = float(np.linalg.norm(omega))
    head = np.array(list(itertools.product(range(-N, N + 1), repeat=g - 1)), dtype=np.int64)
    partial = head @ omega[:-1]
    last = np.rint(-partial / omega[-1]).astype(np.int64)
    ok = np.abs(last) <= N
    vecs = np.column_stack([head, last])[ok]
    vecs = vecs[np.any(vecs != 0, axis=1)]
    resid = np.abs(vecs @ omega)
    hits = vecs[resid < rel_tol * np.linalg.norm(vecs, axis=1) * norm_omega]
    relations = set()
    for n in hits:
        d = reduce(math.gcd, (int(abs(v)) for v in n))
        n = n // d
        first = n[np.nonzero(n)[0][0]]
        relations.add(tuple(int(v) for v in (n if first > 0 else -n)))
    if relations:
        return FlowClass(Verdict.RATIONALLY_DEPENDENT, tuple(sorted(relations)), N)
    enough = N >= (1000 if g <= 2 else 50)
    verdict = Verdict.ERGODIC_LIKELY if enough else Verdict.INCONCLUSIVE
    return FlowClass(verdict, (), N)
