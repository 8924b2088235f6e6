"""Constant-free large-r expansions of log F(r x) and constant fitting."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import errors
from .flow import Flow, Verdict, classify_flow


class Regime(Enum):
    GENERAL = "general"
    DIOPHANTINE = "diophantine"
    ERGODIC = "ergodic"
    DIO_ERGODIC = "dio-ergodic"
    G0_CLOSED = "g0-closed"
    G1_CLOSED = "g1-closed"


@dataclass(frozen=True)
class Expansion:
    """``c_r r + d1_sqrt sqrt(r) + log_coeff log r`` plus optional oscillatory terms."""

    regime: Regime
    c_r: float
    d1_sqrt: float
    log_coeff: float
    theta_term: Optional[Callable] = None
    integral_term: Optional[Callable] = None
    M: float = 1.0

    def __call__(self, r):
        return self.predict(r)

    def predict(self, r):
        if np.any(np.asarray(r) < 0):
            raise errors.NegativeR(f"r must be non-negative, got {r}")
        if self.integral_term is not None and np.any(np.asarray(r) < self.M):
            raise ValueError(f"the general regime needs r >= M = {self.M}")
        r_arr = np.asarray(r, dtype=float)
        value = self.c_r * r_arr + self.d1_sqrt * np.sqrt(r_arr) + self.log_coeff * np.log(r_arr)
        if self.theta_term is not None:
            value = value + self.theta_term(r_arr)
        if self.integral_term is not None:
            value = value + self.integral_term(r_arr)
        return float(value) if value.ndim == 0 else value


def log_theta_of_nu(flow: Flow):
    """``r -> log theta(nu(r))``; theta is real and positive on real arguments."""
    surface = flow.surface

    def term(r):
        nu = np.mod(surface.nu(r), 1.0)
        return np.log(np.real(flow.theta(nu)))

    return term


def build_expansion(flow: Flow, regime, M=1.0, T_average=1e4, search_bound=None) -> Expansion:
    regime = Regime(regime)
    surface = flow.surface
    cfg = surface.config
    g, alpha = cfg.g, cfg.alpha
    c, d1 = surface.c, surface.d1
    base_log = (1 - 4 * alpha * alpha) / 16
    ergodic_log = -(g + 2 * alpha * alpha) / 8
    theta_term = log_theta_of_nu(flow) if g else None

    if regime is Regime.G0_CLOSED:
        if g != 0:
            raise errors.InvalidConfiguration("the g0-closed form needs a single interval")
        x1 = cfg.x[0]
        return Expansion(regime, -x1 / 4, alpha * math.sqrt(x1), -alpha * alpha / 4)
    if regime is Regime.G1_CLOSED:
        if g != 1:
            raise errors.InvalidConfiguration("the g1-closed form needs exactly two intervals")
        return Expansion(regime, c, -d1, -(1 + 2 * alpha * alpha) / 8, theta_term)
    if regime is Regime.GENERAL:
        def integral(r):
            r_arr = np.atleast_1d(r)
            vals = np.array([flow.oscillatory_integrals(M, float(v)).sum() for v in r_arr])
            vals = -vals / 32
            return vals.reshape(np.shape(r)) if np.ndim(r) else float(vals[0])

        return Expansion(regime, c, -d1, base_log, theta_term, integral, M)
    if regime is Regime.DIOPHANTINE:
        averages = flow.time_averages(T_average).values
        return Expansion(regime, c, -d1, base_log - averages.sum() / 32, theta_term)
    # Ergodic regimes: refuse when a rational relation is visible.
    if g >= 2:
        bound = search_bound if search_bound is not None else (1000 if g == 2 else 50)
        verdict = classify_flow(surface.Omega, bound)
        if verdict.verdict is Verdict.RATIONALLY_DEPENDENT:
            raise errors.RegimeRequiresErgodic(
                f"frequencies satisfy integer relations {verdict.relations}")
    if regime is Regime.ERGODIC:
        return Expansion(regime, c, -d1, ergodic_log)
    return Expansion(regime, c, -d1, ergodic_log, theta_term)


def predict_log_F(r, regime, flow: Flow, M=1.0):
    return build_expansion(flow, regime, M).predict(r)


@dataclass(frozen=True)
class FitResult:
    C_hat: float
    residuals: np.ndarray
    rms: float
    drift_exponent: float

    def __str__(self):
        return (f"C_hat = {self.C_hat:.12g}\nrms = {self.rms:.6g}\n"
                f"drift_exponent = {self.drift_exponent:.4g}")


def _drift_exponent(r, d, phases, bounds=(-3.0, 1.0)):
    """Power ``p`` in ``d ~ C + r^p (a_0 + sum_k a_k cos 2 pi nu_k + b_k sin 2 pi nu_k)``.

    For fixed ``p`` the model is linear, so ``p`` is found by minimising the
    least-squares misfit over ``bounds`` (variable projection).
    """
    columns = [np.ones_like(r)]
    if phases is not None:
        ph = np.asarray(phases, dtype=float).reshape(len(r), -1)
        columns += [np.cos(2 * np.pi * ph[:, k]) for k in range(ph.shape[1])]
        columns += [np.sin(2 * np.pi * ph[:, k]) for k in range(ph.shape[1])]
    shape = np.column_stack(columns)
    if len(r) <= shape.shape[1] + 1:
        raise errors.InsufficientPoints(
            f"{len(r)} points cannot determine {shape.shape[1] + 2} drift parameters")
    log_r = np.log(r)
    scale_r = np.exp(log_r.mean())

    def misfit(p):
        design = np.column_stack([np.ones_like(r), shape * ((r / scale_r) ** p)[:, None]])
        coef, *_ = np.linalg.lstsq(design, d, rcond=None)
        return float(np.sum((design @ coef - d) ** 2))

    grid = np.linspace(bounds[0], bounds[1], 81)
    values = [misfit(p) for p in grid]
    best = int(np.argmin(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    res = minimize_scalar(misfit, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
    return float(res.x)


def fit_constant(r_grid, direct_values, predictions, phases=None) -> FitResult:
    """Fit the additive constant and characterise what remains.

    ``C_hat`` is the mean of ``direct - prediction``; ``rms`` is the spread
    about it.  ``drift_exponent`` is the power of ``r`` that best describes
    the remaining trend, optionally modulated by the flow phases ``phases``
    (an ``(n, g)`` array of ``nu(r)``), which is the shape the next
    correction term takes.
    """
    r = np.asarray(r_grid, dtype=float)
    direct = np.asarray(direct_values, dtype=float)
    pred = np.asarray(predictions, dtype=float)
    if len(r) < 5 or not len(r) == len(direct) == len(pred):
        raise errors.InsufficientPoints(
            f"need at least 5 aligned points, got {len(r)}, {len(direct)}, {len(pred)}")
    d = direct - pred
    C_hat = float(np.mean(d))
    residuals = d - C_hat
    rms = float(np.sqrt(np.mean(residuals ** 2)))
    if rms <= 1e-14 * (1 + abs(C_hat)):
        drift = math.nan
    else:
        drift = _drift_exponent(r, d, phases)
    return FitResult(C_hat, residuals, rms, drift)
