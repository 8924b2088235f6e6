"""Riemann theta function by a truncated lattice sum.

The sum runs over the ellipsoid ``n^T Im(tau) n <= radius**2``.  With
``y = Im z`` and ``rho = sqrt(n^T Y n)`` every term obeys
``|term| <= exp(-pi rho**2 + 2 pi rho sqrt(y^T Y^{-1} y))``, so the radius is
the smallest one whose shell-by-shell tail bound falls below ``tol`` for all
``|y| <= z_im_max``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ImaginaryPartTooLarge

_CHUNK = 1 << 22


def _tail_bound(radius, slack, lam_min, g):
    """Upper bound on the discarded part of the sum outside ``rho > radius``."""
    total = 0.0
    k = radius
    while True:
        # Lattice points with rho in [k, k+1) fit in a cube of side 2(k+1)/sqrt(lam_min).
        count = (2.0 * (k + 1.0) / np.sqrt(lam_min) + 1.0) ** g
        term = count * np.exp(-np.pi * k * k + 2 * np.pi * k * slack)
        total += term
        if k > slack + 1 and term < 1e-30 * max(total, 1e-300):
            return total
        k += 1.0


def _choose_radius(lam_min, slack, g, tol):
    radius = max(1.0, slack)
    while _tail_bound(radius, slack, lam_min, g) > tol:
        radius += 0.25
    return radius


@dataclass(frozen=True)
class ThetaEvaluator:
    """theta(z | tau) = sum_n exp(i pi n^T tau n + 2 i pi n^T z)."""

    tau: np.ndarray
    tol: float = 1e-15
    z_im_max: float | None = None
    lambda_min: float = field(init=False)
    radius: float = field(init=False)
    lattice: np.ndarray = field(init=False, repr=False)
    _quad_phase: np.ndarray = field(init=False, repr=False)
    _im_metric: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tau = np.atleast_2d(np.asarray(self.tau, dtype=complex))
        g = tau.shape[0]
        set_ = lambda k, v: object.__setattr__(self, k, v)
        set_("tau", tau)
        if g == 0:
            set_("z_im_max", 0.0)
            set_("lambda_min", np.inf)
            set_("radius", 0.0)
            set_("lattice", np.zeros((1, 0), dtype=int))
            set_("_quad_phase", np.zeros(1, dtype=complex))
            set_("_im_metric", np.zeros((0, 0)))
            return
        Y = tau.imag
        lam = float(np.min(np.linalg.eigvalsh(Y)))
        if self.z_im_max is None:
            # Enough for the half periods (1/2) sum_{k<=j} tau_k met on the gaps.
            partial = 0.5 * np.cumsum(Y, axis=1)
            set_("z_im_max", float(np.max(np.linalg.norm(partial, axis=0))) + 1e-9)
        slack = self.z_im_max / np.sqrt(lam)
        radius = _choose_radius(lam, slack, g, self.tol)
        Yinv = np.linalg.inv(Y)
        bounds = np.floor(radius * np.sqrt(np.diag(Yinv))).astype(int)
        axes = [np.arange(-b, b + 1) for b in bounds]
        pts = np.array(list(itertools.product(*axes)), dtype=int).reshape(-1, g)
        keep = np.einsum("pi,ij,pj->p", pts, Y, pts) <= radius * radius
        pts = pts[keep]
        set_("lambda_min", lam)
        set_("radius", radius)
        set_("lattice", pts)
        set_("_quad_phase", 1j * np.pi * np.einsum("pi,ij,pj->p", pts, tau, pts))
        set_("_im_metric", Yinv)

    @property
    def g(self):
        return self.tau.shape[0]

    def _prepare(self, z):
        z = np.asarray(z, dtype=complex)
        if self.g == 0:
            shape = z.shape[:-1] if z.ndim else ()
            return np.zeros((max(1, int(np.prod(shape))), 0), dtype=complex), shape
        if z.shape[-1] != self.g:
            raise ValueError(f"expected trailing dimension {self.g}, got shape {z.shape}")
        flat = z.reshape(-1, self.g)
        im_norm = np.linalg.norm(flat.imag, axis=1)
        if np.any(im_norm > self.z_im_max * (1 + 1e-12) + 1e-14):
            raise ImaginaryPartTooLarge(
                f"|Im z| = {im_norm.max():.6g} exceeds the evaluator bound {self.z_im_max:.6g}")
        return flat, z.shape[:-1]

    def _terms(self, flat):
        """Yield (slice, exponentials) chunks of shape (n_z, n_lattice)."""
        step = max(1, _CHUNK // max(1, len(self.lattice)))
        for start in range(0, len(flat), step):
            block = flat[start:start + step]
            phase = self._quad_phase[None, :] + 2j * np.pi * (block @ self.lattice.T)
            yield slice(start, start + step), np.exp(phase)

    def __call__(self, z):
        return self.theta(z)

    def theta(self, z):
        """theta at one point (shape ``(g,)``) or a batch (shape ``(..., g)``)."""
        flat, shape = self._prepare(z)
        if self.g == 0:
            return np.ones(shape, dtype=complex) if shape else complex(1.0)
        out = np.empty(len(flat), dtype=complex)
        for sl, terms in self._terms(flat):
            out[sl] = terms.sum(axis=1)
        return out.reshape(shape) if shape else complex(out[0])

    def theta_grad(self, z):
        """Gradient ``d theta / d z_j``, same batching rules as ``theta``."""
        flat, shape = self._prepare(z)
        out = np.empty((len(flat), self.g), dtype=complex)
        for sl, terms in self._terms(flat):
            out[sl] = 2j * np.pi * (terms @ self.lattice)
        return out.reshape(shape + (self.g,))

    def theta_and_grad(self, z):
        flat, shape = self._prepare(z)
        val = np.empty(len(flat), dtype=complex)
        grad = np.empty((len(flat), self.g), dtype=complex)
        for sl, terms in self._terms(flat):
            val[sl] = terms.sum(axis=1)
            grad[sl] = 2j * np.pi * (terms @ self.lattice)
        return val.reshape(shape), grad.reshape(shape + (self.g,))

    def with_radius(self, radius):
        """Copy evaluating over a different truncation radius (for convergence checks)."""
        clone = ThetaEvaluator(self.tau, self.tol, self.z_im_max)
        g = self.g
        Y = self.tau.imag
        bounds = np.floor(radius * np.sqrt(np.diag(self._im_metric))).astype(int)
        pts = np.array(list(itertools.product(*[np.arange(-b, b + 1) for b in bounds])),
                       dtype=int).reshape(-1, g)
        pts = pts[np.einsum("pi,ij,pj->p", pts, Y, pts) <= radius * radius]
        object.__setattr__(clone, "radius", float(radius))
        object.__setattr__(clone, "lattice", pts)
        object.__setattr__(clone, "_quad_phase", 1j * np.pi * np.einsum("pi,ij,pj->p", pts, self.tau, pts))
        return clone
