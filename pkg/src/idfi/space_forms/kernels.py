"""Heat kernels on the model spaces for the generator (1/2) Laplacian.

All kernels are densities of P_t delta_x with respect to the volume measure,
expressed through geodesic distance r.  Curved formulas are the unit-curvature
ones composed with the exact scaling p_t^(kappa)(r) = R^-n p_(t/R^2)(r/R).
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import eval_legendre

from ..errors import NumericsError, ValidationError
from .geometry import SpaceForm

_LEGENDRE_LMAX = 5000


def _flat_kernel(n: int, t: float, r: np.ndarray) -> np.ndarray:
    return (2.0 * math.pi * t) ** (-0.5 * n) * np.exp(-(r**2) / (2.0 * t))


def _h3_kernel_unit(t: float, r: np.ndarray) -> np.ndarray:
    # r/sinh(r) with the removable singularity at zero
    small = r < 1e-8
    safe = np.where(small, 1.0, r)
    factor = np.where(small, 1.0 - r**2 / 6.0, safe / np.sinh(safe))
    return (2.0 * math.pi * t) ** (-1.5) * factor * np.exp(-0.5 * t - r**2 / (2.0 * t))


def _h2_integral(t: float, r: np.ndarray, n_nodes: int) -> np.ndarray:
    """Edge-desingularized integral for the hyperbolic-plane kernel.

    Two Gauss-Legendre panels.  On the edge panel w in (r, r + delta),
    delta = min(1, w_max - r), substitute s^2 = cosh w - cosh r, giving
    2 (w / sinh w) e^(-w^2/(2t)) ds with w = arccosh(cosh r + s^2); the
    integrand is analytic in s^2 uniformly in r because arccosh(1 + x)^2
    is analytic at x = 0.  On the remainder (r + delta, w_max) the raw
    integrand is kept, its edge branch point now a fixed distance away.
    """
    # keep only w with (w^2 - r^2)/(2t) <= 39; the rest is below 1e-16
    w_max = np.sqrt(r**2 + 78.0 * t)
    delta = np.minimum(1.0, w_max - r)
    nodes, weights = leggauss(n_nodes)
    un = 0.5 * (nodes[None, :] + 1.0)
    uw = 0.5 * weights[None, :]
    # cosh(r + delta) - cosh r written cancellation-free
    s_top = np.sqrt(2.0 * np.sinh(0.5 * (2.0 * r + delta)) * np.sinh(0.5 * delta))
    s = un * s_top[:, None]
    ds = uw * s_top[:, None]
    # cosh w - 1 = (cosh r - 1) + s^2, cancellation-free at small r
    eps = 2.0 * np.sinh(0.5 * r[:, None]) ** 2 + s**2
    w = np.arccosh(1.0 + eps)
    wsq = w**2
    tiny = wsq < 1e-12
    ratio = np.where(tiny, 1.0 - wsq / 6.0, w / np.sinh(np.where(tiny, 1.0, w)))
    edge = np.sum(2.0 * ratio * np.exp(-wsq / (2.0 * t)) * ds, axis=1)
    lo = r + delta
    span = np.maximum(w_max - lo, 0.0)
    w2 = lo[:, None] + un * span[:, None]
    dw = uw * span[:, None]
    den = 2.0 * np.sinh(0.5 * (w2 + r[:, None])) * np.sinh(0.5 * (w2 - r[:, None]))
    outer_f = w2 * np.exp(-(w2**2) / (2.0 * t)) / np.sqrt(np.maximum(den, 1e-300))
    return edge + np.sum(outer_f * dw, axis=1)


def _h2_kernel_unit(t: float, r: np.ndarray, n_nodes: int = 80, tol: float = 1e-9) -> np.ndarray:
    """Millson-type integral for the hyperbolic plane, generator Delta/2.

    p_t(r) = sqrt(2) (2 pi t)^(-3/2) e^(-t/8) * integral over w in (r, inf)
    of w e^(-w^2/(2t)) / sqrt(cosh w - cosh r) dw.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    integral = _h2_integral(t, r, n_nodes)
    check = _h2_integral(t, r, n_nodes // 2 + 8)
    err = np.max(np.abs(integral - check) / np.maximum(np.abs(integral), 1e-12))
    if err > tol:
        raise NumericsError(
            f"hyperbolic-plane kernel quadrature achieved only {err:.3e} relative"
        )
    return math.sqrt(2.0) * (2.0 * math.pi * t) ** (-1.5) * math.exp(-t / 8.0) * integral


def _s2_kernel_unit(t: float, r: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Spherical-harmonic series on the unit sphere, generator Delta/2."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    x = np.cos(np.clip(r, 0.0, math.pi))
    total = np.zeros_like(r)
    coef = 0.0
    for ell in range(_LEGENDRE_LMAX + 1):
        coef = (2 * ell + 1) / (4.0 * math.pi) * math.exp(-0.5 * ell * (ell + 1) * t)
        total = total + coef * eval_legendre(ell, x)
        # |P_l| <= 1; past the coefficient peak the terms decay at ratio
        # below e^(-(l+1)t) (2l+3)/(2l+1) < 1, giving a geometric tail bound
        decay = math.exp(-(ell + 1) * t) * (2 * ell + 3) / (2 * ell + 1)
        if decay < 1.0:
            tail = coef * decay / (1.0 - decay)
            if tail < tol * max(1.0, float(np.max(np.abs(total)))):
                return total
    raise NumericsError(
        f"sphere kernel series not converged after {_LEGENDRE_LMAX} terms "
        f"(last coefficient {coef:.3e})"
    )


def heat_kernel(space: SpaceForm, t: float, r) -> np.ndarray | float:
    """Density of P_t delta_x at geodesic distance r, volume-measure reference."""
    if t <= 0:
        raise ValidationError("kernel needs t > 0")
    r_arr = np.asarray(r, dtype=float)
    scalar = r_arr.ndim == 0
    r_arr = np.atleast_1d(r_arr)
    if np.any(r_arr < 0):
        raise ValidationError("distances must be nonnegative")
    if space.model == "flat":
        out = _flat_kernel(space.n, t, r_arr)
    else:
        rad = space.radius
        t_unit = t / rad**2
        r_unit = r_arr / rad
        if space.model == "sphere":
            out = rad ** (-space.n) * _s2_kernel_unit(t_unit, r_unit)
        elif space.n == 3:
            out = rad ** (-space.n) * _h3_kernel_unit(t_unit, r_unit)
        else:
            out = rad ** (-space.n) * _h2_kernel_unit(t_unit, r_unit)
    return float(out[0]) if scalar else out


def sphere_area(space: SpaceForm, r: np.ndarray) -> np.ndarray:
    """Area of the geodesic sphere of radius r (the radial volume weight)."""
    r = np.asarray(r, dtype=float)
    n = space.n
    if space.model == "flat":
        surface = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi, 4: 2.0 * math.pi**2}[n]
        return surface * r ** (n - 1) if n > 1 else np.full_like(r, surface)
    a = space.curvature_scale
    if space.model == "sphere":
        return 2.0 * math.pi * np.sin(a * r) / a
    if n == 2:
        return 2.0 * math.pi * np.sinh(a * r) / a
    return 4.0 * math.pi * (np.sinh(a * r) / a) ** 2


def max_radius(space: SpaceForm) -> float:
    return math.pi / space.curvature_scale if space.model == "sphere" else math.inf


def radial_support(space: SpaceForm, t: float, margin: float = 14.0) -> float:
    """Radius capturing the kernel mass up to far below quadrature tolerance."""
    spread = margin * math.sqrt(t)
    if space.model == "hyperboloid":
        spread += (space.n - 1) * space.curvature_scale * t
    return min(spread, max_radius(space))
