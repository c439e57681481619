"""Independent reference implementations used to derive expected test values.

Everything here is deliberately naive (fixed-step integrators, brute-force
enumeration, textbook closed forms) and shares no code with the package under
test.  Tests either call these directly or freeze values computed from them.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate


# ---------------------------------------------------------------------------
# quadrature


def simpson_fixed(f, a: float, b: float, n: int = 2001) -> float:
    """Composite Simpson rule with n (odd) nodes."""
    if n % 2 == 0:
        n += 1
    x = np.linspace(a, b, n)
    return float(integrate.simpson(np.asarray([f(t) for t in x]), x=x))


def quad_1d(f, a: float, b: float) -> float:
    val, _ = integrate.quad(f, a, b, limit=200)
    return float(val)


def nquad_nd(f, ranges) -> float:
    val, _ = integrate.nquad(f, ranges, opts={"limit": 120})
    return float(val)


# ---------------------------------------------------------------------------
# Gaussian closed forms


def gaussian_entropy_vs_lebesgue(cov: np.ndarray) -> float:
    """H(N(m, cov) || Lebesgue) = -(n/2) log(2 pi e) - (1/2) log det cov."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0]
    sign, ld = np.linalg.slogdet(cov)
    assert sign > 0
    return -0.5 * n * math.log(2.0 * math.pi * math.e) - 0.5 * ld


def gaussian_kl(m0, c0, m1, c1) -> float:
    """KL(N(m0,c0) || N(m1,c1))."""
    m0 = np.asarray(m0, float)
    m1 = np.asarray(m1, float)
    c0 = np.asarray(c0, float)
    c1 = np.asarray(c1, float)
    n = c0.shape[0]
    c1i = np.linalg.inv(c1)
    d = m1 - m0
    _, ld0 = np.linalg.slogdet(c0)
    _, ld1 = np.linalg.slogdet(c1)
    return 0.5 * (np.trace(c1i @ c0) + d @ c1i @ d - n + ld1 - ld0)


def gaussian_fisher_vs_lebesgue(cov: np.ndarray) -> np.ndarray:
    """Fisher information matrix of N(m, cov) relative to Lebesgue: cov^{-1}."""
    return np.linalg.inv(np.asarray(cov, dtype=float))


def standard_normal_pdf(x: np.ndarray) -> float:
    x = np.atleast_1d(np.asarray(x, float))
    return float(np.exp(-0.5 * np.dot(x, x)) / (2.0 * math.pi) ** (x.size / 2))


# ---------------------------------------------------------------------------
# ODE integrators


def rk4_scalar(f, y0: float, t0: float, t1: float, steps: int = 20000) -> float:
    h = (t1 - t0) / steps
    t, y = t0, y0
    for _ in range(steps):
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def rk4_matrix(f, y0: np.ndarray, t0: float, t1: float, steps: int = 20000) -> np.ndarray:
    h = (t1 - t0) / steps
    t = t0
    y = np.asarray(y0, dtype=float).copy()
    for _ in range(steps):
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        y = 0.5 * (y + y.T)
        t += h
    return y


def trapezoid_matrix(f, a: float, b: float, n: int = 4001) -> np.ndarray:
    ts = np.linspace(a, b, n)
    vals = np.stack([f(t) for t in ts])
    return np.trapezoid(vals, ts, axis=0)


# ---------------------------------------------------------------------------
# scalar optimization


def golden_section(f, a: float, b: float, tol: float = 1e-12) -> float:
    """Argmin of a unimodal function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def parabola_refine(f, s: float, h: float = 1e-4) -> float:
    """One quadratic-fit step around s; lifts an argmin estimate from
    sqrt(eps) to near machine accuracy for smooth strictly convex f."""
    fm, f0, fp = f(s - h), f(s), f(s + h)
    denom = fp - 2.0 * f0 + fm
    if denom <= 0:
        return s
    return s - 0.5 * h * (fp - fm) / denom


# ---------------------------------------------------------------------------
# discrete product spaces (brute force over all states)


def enumerate_states(k: int, n: int):
    return itertools.product(range(k), repeat=n)


def product_weight(state, weights: np.ndarray) -> float:
    w = 1.0
    for i, s in enumerate(state):
        w *= weights[i][s]
    return w


def discrete_entropy_functional(f, k: int, n: int, weights, p: float) -> float:
    """Ent[f^p] = E[f^p log f^p] - E[f^p] log E[f^p] under the product measure."""
    efp = 0.0
    eflog = 0.0
    for st in enumerate_states(k, n):
        w = product_weight(st, weights)
        fp = f(st) ** p
        efp += w * fp
        if fp > 0:
            eflog += w * fp * math.log(fp)
    return eflog - efp * math.log(efp)


def discrete_coordinate_energy(f, g, k: int, n: int, weights, i: int, c: float = 0.5) -> float:
    """E[(d_i f)(d_i g)] with d_i h = c * sum_s (h(x) - h(x with x_i=s)) * w_i(s).

    For k == 2 this reduces to the convention d_i h = c * (h(x) - h(flip_i x)).
    """
    total = 0.0
    for st in enumerate_states(k, n):
        w = product_weight(st, weights)
        df = 0.0
        dg = 0.0
        for s in range(k):
            if s == st[i]:
                continue
            alt = list(st)
            alt[i] = s
            alt = tuple(alt)
            df += (f(st) - f(alt)) * weights[i][s]
            dg += (g(st) - g(alt)) * weights[i][s]
        wsum = sum(weights[i][s] for s in range(k) if s != st[i])
        if wsum > 0:
            df = c * df / wsum * 1.0
            dg = c * dg / wsum * 1.0
        total += w * df * dg
    return total


def two_point_energy_p(f0: float, f1: float, w0: float, w1: float, p: float) -> float:
    """Normalized one-coordinate energy (f0 - f1)(f0^{p-1} - f1^{p-1}) / (4 E[f^p])."""
    efp = w0 * f0**p + w1 * f1**p
    return 0.25 * (f0 - f1) * (f0 ** (p - 1.0) - f1 ** (p - 1.0)) / efp


def two_point_entropy(f0: float, f1: float, w0: float, w1: float, p: float) -> float:
    efp = w0 * f0**p + w1 * f1**p
    e = 0.0
    for w, v in ((w0, f0), (w1, f1)):
        fp = v**p
        if fp > 0:
            e += w * fp * math.log(fp)
    return e - efp * math.log(efp)


# ---------------------------------------------------------------------------
# norms on boxes


def lp_norm_box(f, p: float, lo, hi, n_axis: int = 200) -> float:
    """(integral over the box of |f|^p)^(1/p) by tensorized midpoint rule."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    dim = lo.size
    axes = [np.linspace(lo[d], hi[d], n_axis, endpoint=False) + (hi[d] - lo[d]) / (2 * n_axis) for d in range(dim)]
    grid = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grid], axis=-1)
    vals = np.abs(np.asarray([f(x) for x in pts])) ** p
    cell = float(np.prod((hi - lo) / n_axis))
    return float((np.sum(vals) * cell) ** (1.0 / p))


# ---------------------------------------------------------------------------
# constant-curvature model spaces


def smoothed_gaussian_bump(width: float, offset: float, t: float, n: int):
    """Closed-form heat smoothing of exp(-r^2/(2w)) on R^n.

    Returns (value, gradient, hessian) at a point at distance `offset` from
    the bump center, in a frame whose first axis points away from the center.
    """
    w = width
    x = np.zeros(n)
    x[0] = offset
    s = w + t
    val = (w / s) ** (n / 2.0) * math.exp(-offset**2 / (2.0 * s))
    grad = -(x / s) * val
    hess = (np.outer(x, x) / s**2 - np.eye(n) / s) * val
    return val, grad, hess


def gaussian_posterior_kl(width: float, offset: float, t: float, n: int) -> float:
    """KL of the bump-weighted endpoint law against N(x0, t I) on R^n.

    The tilted law is Gaussian with covariance s I, s = 1/(1/w + 1/t), and
    mean pulled toward the bump center.
    """
    s = 1.0 / (1.0 / width + 1.0 / t)
    mean_gap = offset - s * (offset / t)
    return 0.5 * (n * s / t - n + mean_gap**2 / t + n * math.log(t / s))


def flat_boundary_matrices(width: float, offset: float, t: float, n: int):
    """(v0, vT, m0, mT, cT) for the bump-weighted Gaussian channel on R^n.

    vT and mT average (grad log f)^2 and -hess log f under the tilted
    Gaussian; with log f quadratic both reduce to moments of that Gaussian.
    """
    w = width
    s = 1.0 / (1.0 / w + 1.0 / t)
    mean = np.zeros(n)
    mean[0] = s * offset / t  # posterior mean measured from the bump center
    x = np.zeros(n)
    x[0] = offset
    glog = -(x - np.zeros(n)) / (w + t)
    v0 = np.outer(glog, glog)
    m0 = np.eye(n) / (w + t)
    v_t = (s * np.eye(n) + np.outer(mean, mean)) / w**2
    m_t = np.eye(n) / w
    # Laplacian of the smoothed bump over its value, from the closed form
    c_t = offset**2 / (w + t) ** 2 - n / (w + t)
    # traceless part of hess P_t f / P_t f; smoothing commutes with hess here
    j_t = (np.outer(x, x) - offset**2 / n * np.eye(n)) / (w + t) ** 2
    return v0, v_t, m0, m_t, c_t, j_t


def spherical_triangle_excess(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Area of the geodesic triangle abc on the unit sphere via vertex angles."""

    def angle_at(p, q, r):
        u = q - np.dot(q, p) * p
        v = r - np.dot(r, p) * p
        cos = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
        return math.acos(min(1.0, max(-1.0, cos)))

    return (
        angle_at(a, b, c) + angle_at(b, c, a) + angle_at(c, a, b) - math.pi
    )


def legendre_kernel_moment(kernel_vals, theta: np.ndarray, ell: int) -> float:
    """Integral of a radial density on S^2 against the Legendre mode ell.

    For the heat kernel this equals exp(-ell (ell+1) t / 2): the modes are
    Laplacian eigenfunctions with eigenvalue -ell(ell+1) and generator is
    half the Laplacian.
    """
    from numpy.polynomial.legendre import legval

    coef = np.zeros(ell + 1)
    coef[ell] = 1.0
    integrand = kernel_vals * legval(np.cos(theta), coef) * 2.0 * math.pi * np.sin(theta)
    return float(integrate.simpson(integrand, x=theta))


def radial_entropy_direct(kernel_vals, area_vals, phi_vals, r: np.ndarray) -> float:
    """Entropy of the phi-weighted kernel law by dense Simpson quadrature."""
    dens = kernel_vals * area_vals
    z = float(integrate.simpson(dens * phi_vals, x=r))
    num = float(integrate.simpson(dens * phi_vals * np.log(phi_vals), x=r))
    return num / z - math.log(z)
