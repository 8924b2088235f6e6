"""Abel map on the first sheet, based at the branch point ``-x_1``.

The normalised differentials are ``omega = (1, s, ..., s**(g-1)) ds / sqrt R
@ A^{-1}``.  Off the real axis the first sheet is the product of principal
square roots of ``s + x_k``; on the real axis left of ``-x_1`` the upper
boundary value is used unless ``side='lower'``, which is its conjugate.

Real paths run from ``-x_1`` along the axis; a complex target is reached by
a final vertical segment from its real part.  Whole segments between branch
points reuse the surface's gap and cut moments; a partial segment uses
``s = m + h cos(theta)`` so that both endpoint singularities disappear.
"""
from __future__ import annotations

import math

import numpy as np

from .quadrature import integrate_smooth
from .surface import SurfaceData, _product_without

LATTICE_TOL = 1e-8


def reduce_mod_lattice(v, tau):
    """Representative of ``v`` modulo ``Z^g + tau Z^g`` with the smallest
    lattice coordinates (``|Y^{-1} Im| <= 1/2``, ``|Re| <= 1/2``)."""
    v = np.asarray(v, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    if tau.size == 0:
        return v
    m = np.rint(np.linalg.solve(tau.imag, v.imag.T).T)
    v = v - m @ tau.T
    return v - np.rint(v.real)


def lattice_distance(v, w, tau):
    """Norm of ``v - w`` after reduction modulo the period lattice."""
    return float(np.max(np.abs(reduce_mod_lattice(np.asarray(v) - np.asarray(w), tau)), initial=0.0))


def endpoint_half_periods(surface: SurfaceData):
    """Closed-form boundary values at the branch points.

    Returns an array of shape ``(2g+1, 2, g)``: row ``k-1`` holds
    ``(phi_plus, phi_minus)`` at ``-x_k``.
    """
    g = surface.g
    tau = surface.tau
    eye = np.eye(g + 1)[:, :g]  # e_{g+1} := 0
    table = np.zeros((2 * g + 1, 2, g), dtype=complex)
    partial = np.zeros(g, dtype=complex)
    for j in range(1, g + 1):
        partial = partial + tau[:, j - 1]
        even = 0.5 * (eye[0] - eye[j - 1])
        odd = 0.5 * (eye[0] - eye[j])
        table[2 * j - 1] = [even + 0.5 * partial, even - 0.5 * partial]
        table[2 * j] = [odd + 0.5 * partial, odd - 0.5 * partial]
    return table


class AbelMap:
    def __init__(self, surface: SurfaceData):
        self.surface = surface
        self.config = surface.config
        g = surface.g
        self._inv = surface.A_inv
        # Contribution of each whole real segment, walking left from -x_1 on
        # the upper side; index 2k-2 is cut k, index 2k-1 is gap k.  These are
        # integrated here (Legendre in the angle variable) rather than reused
        # from the surface, so the endpoint table is an independent check.
        self._steps = [self._partial_segment(None, seg) for seg in range(2 * g)]
        self._cumulative = np.cumsum([np.zeros(g, dtype=complex)] + self._steps, axis=0)
        self._at_infinity = None

    @property
    def g(self):
        return self.surface.g

    # --- integrand helpers -------------------------------------------------
    def _powers(self, s):
        return np.asarray(s)[:, None] ** np.arange(self.g)[None, :]

    def _sqrtR_complex(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.ones_like(s)
        for xv in self.config.x:
            out = out * np.sqrt(s + xv)
        return out

    # --- pieces of the path ------------------------------------------------
    def _right_of_first(self, z):
        """Integral from -x_1 to real z > -x_1 (z may be inf)."""
        x = self.config.x
        g = self.g

        def smooth(v):
            s = -x[0] + v * v
            rest = np.sqrt(_product_without(s, x, {0}))
            return (2.0 / rest)[:, None] * self._powers(s)

        def tail(w):
            s = -x[0] + 1.0 / (w * w)
            rest = np.sqrt(_product_without(s, x, {0}))
            # s**p / rest decays like w**(2(g-p)), keeping the integrand bounded.
            return (2.0 / (rest * w * w))[:, None] * self._powers(s)

        v_end = math.inf if math.isinf(z) else math.sqrt(z + x[0])
        cut_v = 1.0 + math.sqrt(x[-1])
        if v_end <= cut_v:
            moments = integrate_smooth(smooth, 0.0, v_end)
        else:
            moments = (integrate_smooth(smooth, 0.0, cut_v)
                       + integrate_smooth(tail, 1.0 / v_end, 1.0 / cut_v))
        return moments.astype(complex) @ self._inv if g else np.zeros(0, dtype=complex)

    def _partial_segment(self, z, seg):
        """Integral from the right end of segment ``seg`` leftwards to ``z``
        (to the left end when ``z`` is None)."""
        x = self.config.x
        g = self.g
        k = seg // 2 + 1 if seg % 2 == 0 else (seg + 1) // 2
        if seg == 2 * g:
            # Unbounded cut left of -x_{2g+1}: only the right end is singular.
            b = -x[-1]

            def integrand(v):
                s = b - v * v
                rest = np.sqrt(np.abs(_product_without(s, x, {2 * g})))
                return (2.0 / rest)[:, None] * self._powers(s)

            moments = integrate_smooth(integrand, 0.0, math.sqrt(b - z))
            sign = 1j * (-1) ** (g + 1)  # upper value of 1/sqrt R is -i(-1)^(g+1)/sqrt|R|, walked leftwards
            return sign * moments @ self._inv
        if seg % 2 == 0:
            left, right = self.config.cut(k)
            skip = {2 * k - 2, 2 * k - 1}
            sign = 1j * (-1) ** (k + 1)
        else:
            left, right = self.config.gap(k)
            skip = {2 * k - 1, 2 * k}
            sign = (-1.0) ** (k + 1)
        mid, half = 0.5 * (left + right), 0.5 * (right - left)
        if z is None:
            theta_end = math.pi
        else:
            theta_end = math.acos(min(1.0, max(-1.0, (z - mid) / half)))

        def integrand(theta):
            s = mid + half * np.cos(theta)
            return (1.0 / np.sqrt(np.abs(_product_without(s, x, skip))))[:, None] * self._powers(s)

        moments = integrate_smooth(integrand, 0.0, theta_end)
        return sign * moments @ self._inv

    def _real_upper(self, z):
        x = self.config.x
        g = self.g
        if z >= -x[0]:
            return self._right_of_first(z)
        ends = [-v for v in x]
        # Segment index: 0 = cut 1, 1 = gap 1, ..., 2g = unbounded cut.
        seg = next((i for i in range(2 * g) if ends[i + 1] <= z < ends[i]), 2 * g)
        base = self._cumulative[seg]
        if seg < 2 * g and z == ends[seg + 1]:
            return self._cumulative[seg + 1].copy()
        return base + self._partial_segment(z, seg)

    def _vertical(self, x0, height):
        """Integral from real x0 up to x0 + i*height (height > 0), first sheet."""
        def integrand(v):
            t = height * v * v
            s = x0 + 1j * t
            # ds = i dt = 2 i height v dv; sqrt R may vanish like sqrt(t) at v=0.
            return (2j * height * v / self._sqrtR_complex(s))[:, None] * self._powers(s)

        return integrate_smooth(integrand, 0.0, 1.0) @ self._inv

    def __call__(self, z, side="upper"):
        return self.abel_point(z, side)

    def abel_point(self, z, side="upper"):
        """First-sheet Abel map ``int_{-x_1}^{z} omega`` (boundary value ``side`` on the axis)."""
        if self.g == 0:
            return np.zeros(0, dtype=complex)
        if side not in ("upper", "lower"):
            raise ValueError("side must be 'upper' or 'lower'")
        if isinstance(z, (complex, np.complexfloating)) and z.imag != 0:
            if z.imag < 0:
                return np.conj(self.abel_point(z.conjugate(), "upper"))
            return self._real_upper(z.real) + self._vertical(z.real, z.imag)
        z = float(np.real(z))
        if math.isinf(z) and z > 0:
            if self._at_infinity is None:
                self._at_infinity = self._right_of_first(z)
            value = self._at_infinity.copy()
        else:
            value = self._real_upper(z)
        return np.conj(value) if side == "lower" else value

    def gap_values(self, s, k):
        """Vectorised upper-side Abel map at points ``s`` inside gap ``k``."""
        left, right = self.config.gap(k)
        return np.array([self._real_upper(float(v)) for v in np.atleast_1d(s)])
