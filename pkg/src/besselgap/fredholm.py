"""log det(I - K) for the Bessel kernel restricted to r * (gap set).

Nystrom discretisation: Gauss nodes on every interval, the matrix
``M_ij = sqrt(W_i W_j) H(x_i, x_j)`` and a Cholesky factorisation of
``I - M``.  The kernel is written as ``K(x, y) = (x y)^(alpha/2) H(x, y)``
with ``H`` built from the entire function ``E_alpha(x) = J_alpha(sqrt x) /
x^(alpha/2)``; the power ``x^alpha`` goes into the weights, and on the
interval touching the origin a Gauss-Jacobi rule absorbs it exactly, so the
integrand stays analytic for every ``alpha > -1``.

When ``F`` is small the eigenvalues of ``M`` crowd towards 1 and double
precision loses about ``|log10 F|`` digits, so the ``auto`` precision mode
switches to mpmath with a working precision sized from the determinant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import errors
from .bessel import reduced_besselj
from .quadrature import unit_rule
from .surface import Configuration

DOUBLE_LOG_FLOOR = -9.0  # below this, auto mode moves to mpmath
PHASE_PER_FLOOR = 16.0  # sqrt-phase extent covered by the floor node count


@dataclass(frozen=True)
class DeterminantResult:
    log_F: float
    nodes_per_interval: int
    converged: bool
    last_delta: float
    deltas: tuple = ()
    precision: str = "double"
    dps: int | None = None
    total_nodes: int = 0

    def __post_init__(self):
        if self.log_F > 1e-12:
            raise errors.MatrixNotContractive(f"log F = {self.log_F} > 0")


def interval_node_counts(r, config: Configuration, m):
    """Nodes per interval: at least ``m``, more for intervals with a long
    oscillation phase ``sqrt(b) - sqrt(a)``."""
    counts = []
    for a, b in config.intervals():
        phase = math.sqrt(r * b) - math.sqrt(r * a)
        counts.append(max(m, math.ceil(m * phase / PHASE_PER_FLOOR)))
    return counts


def nystrom_nodes(r, config: Configuration, m, dps=None):
    """Nodes ``x_i`` and weights ``W_i`` (already including ``x^alpha``)."""
    alpha = config.alpha
    counts = interval_node_counts(r, config, m)
    xs, ws = [], []
    for (a, b), n in zip(config.intervals(), counts):
        if dps is None:
            lo, length = r * a, r * (b - a)
            if a == 0:
                t, w = unit_rule(n, alpha)
                xs.append(length * t)
                ws.append(length ** (alpha + 1) * w)
            else:
                t, w = unit_rule(n, 0.0)
                x = lo + length * t
                xs.append(x)
                ws.append(length * w * x ** alpha)
        else:
            with mpmath.workdps(dps):
                lo = mpmath.mpf(r) * a
                length = mpmath.mpf(r) * b - lo
                t, w = unit_rule(n, alpha if a == 0 else 0.0, dps)
                if a == 0:
                    scale = length ** (alpha + 1)
                    xs.extend(length * ti for ti in t)
                    ws.extend(scale * wi for wi in w)
                else:
                    for ti, wi in zip(t, w):
                        x = lo + length * ti
                        xs.append(x)
                        ws.append(length * wi * x ** alpha)
    if dps is None:
        return np.concatenate(xs), np.concatenate(ws), counts
    return xs, ws, counts


def _matrix_double(x, w, alpha):
    e0 = np.array([reduced_besselj(alpha, v) for v in x])
    e1 = x * np.array([reduced_besselj(alpha + 1, v) for v in x])
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    H = (e1[:, None] * e0[None, :] - e0[:, None] * e1[None, :]) / (2 * diff)
    np.fill_diagonal(H, 0.25 * (e0 * e0 + (e1 * e1 - 2 * alpha * e0 * e1) / x))
    sw = np.sqrt(w)
    return sw[:, None] * H * sw[None, :]


def _logdet_double(M):
    A = np.eye(len(M)) - M
    try:
        L = np.linalg.cholesky(A)
        return 2.0 * float(np.sum(np.log(np.diag(L))))
    except np.linalg.LinAlgError:
        lam = np.linalg.eigvalsh(M)
        if lam.max() >= 1.0:
            raise errors.MatrixNotContractive(f"kernel matrix eigenvalue {lam.max():.17g} >= 1") from None
        return float(np.sum(np.log1p(-lam)))


def _logdet_mp(x, w, alpha, dps):
    n = len(x)
    with mpmath.workdps(dps):
        e0 = [reduced_besselj(alpha, v, dps) for v in x]
        e1 = [v * reduced_besselj(alpha + 1, v, dps) for v in x]
        sw = [mpmath.sqrt(v) for v in w]
        # Lower triangle of I - M, row-major lists for the factorisation.
        rows = []
        for i in range(n):
            row = []
            for j in range(i):
                h = (e1[i] * e0[j] - e0[i] * e1[j]) / (2 * (x[i] - x[j]))
                row.append(-sw[i] * sw[j] * h)
            hd = (e0[i] ** 2 + (e1[i] ** 2 - 2 * alpha * e0[i] * e1[i]) / x[i]) / 4
            row.append(1 - w[i] * hd)
            rows.append(row)
        # Cholesky: L_ij = (A_ij - sum_k L_ik L_jk) / L_jj.
        L = []
        log_det = mpmath.mpf(0)
        for i in range(n):
            Li = []
            Ai = rows[i]
            for j in range(i):
                Lj = L[j]
                Li.append((Ai[j] - mpmath.fdot(Li, Lj[:j])) / Lj[j])
            d = Ai[i] - mpmath.fdot(Li, Li)
            if d <= 0:
                raise errors.MatrixNotContractive(
                    "I - M is not positive definite at the working precision")
            Li.append(mpmath.sqrt(d))
            log_det += mpmath.log(d)
            L.append(Li)
        return log_det


def _required_dps(log_f):
    digits_lost = abs(log_f) / math.log(10) if log_f < 0 else 0.0
    return 25 + math.ceil(1.2 * digits_lost)


def _single(r, config, m, precision, dps):
    x, w, counts = nystrom_nodes(r, config, m, dps if precision == "mp" else None)
    if precision == "double":
        value = _logdet_double(_matrix_double(x, w, config.alpha))
    else:
        # Kept as an mpmath number so level-to-level deltas below double
        # resolution remain measurable.
        value = _logdet_mp(x, w, config.alpha, dps)
    return value, sum(counts)


def _rough_estimate(r, config, m):
    """Double-precision log F, clipping eigenvalues that rounding pushed past 1.

    Only used to pick the working precision; an underestimate of the
    cancellation is caught by the precision check in ``log_det``.
    """
    x, w, _ = nystrom_nodes(r, config, m)
    lam = np.linalg.eigvalsh(_matrix_double(x, w, config.alpha))
    return float(np.sum(np.log(np.maximum(1.0 - lam, 1e-16))))


def log_det(r, config: Configuration, m=64, tol=1e-10, m_max=1024, precision="auto",
            min_levels=2, dps=None) -> DeterminantResult:
    """log F(r x) with node doubling until two levels agree to ``tol``.

    ``precision`` is ``'double'``, ``'mp'`` or ``'auto'``.  ``min_levels``
    forces at least that many doubling levels (useful for convergence
    studies); ``deltas`` records every ``|log F(2m) - log F(m)|``.
    """
    if r < 0:
        raise errors.NegativeR(f"r must be non-negative, got {r}")
    if m < 8:
        raise ValueError("m must be at least 8")
    if r == 0:
        return DeterminantResult(0.0, m, True, 0.0, (), "double", None, 0)
    if precision not in ("auto", "double", "mp"):
        raise ValueError(f"unknown precision {precision!r}")
    mode = precision
    if mode != "double":
        estimate = _rough_estimate(r, config, m)
        if mode == "auto":
            mode = "double" if estimate > DOUBLE_LOG_FLOOR else "mp"
        if mode == "mp" and dps is None:
            dps = _required_dps(estimate)

    while True:
        values, deltas = [], []
        level_m = m
        converged = False
        while level_m <= m_max:
            value, total = _single(r, config, level_m, mode, dps)
            values.append(value)
            if len(values) > 1:
                deltas.append(float(abs(values[-1] - values[-2])))
                if deltas[-1] < tol and len(values) >= min_levels:
                    converged = True
                    break
            level_m *= 2
        level_m = min(level_m, m_max)
        needed = _required_dps(float(values[-1]))
        if mode == "mp" and needed > dps + 5:
            # The double-precision estimate underestimated the cancellation.
            dps = needed
            continue
        break
    return DeterminantResult(float(values[-1]), level_m, converged,
                             deltas[-1] if deltas else math.inf, tuple(deltas),
                             mode, dps if mode == "mp" else None, total)
