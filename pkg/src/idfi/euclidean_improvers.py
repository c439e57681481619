"""Scaling-improved Euclidean functional inequalities.

Each operation returns both sides of a bound (and the optimizing scale
parameters where there are any) so callers can certify the inequality and
measure its deficit.  Conventions fixed here:

  - entropy gaps are taken against the standard Gaussian reference value,
  - per-coordinate Fisher components are diagonal entries of the relative
    Fisher matrix,
  - all scale optimizations happen in log-coordinates, where the objectives
    are strictly convex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional
import math

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import ndtr, ndtri

from .errors import UnsupportedRegimeError, ValidationError
from .info_functionals import (
    LEBESGUE,
    fisher_matrix,
    relative_entropy,
    weighted_second_moment_matrix,
)
from .linalg import sym_eig
from .measures import DensityModel, GaussianSpec, integrate, make_gaussian, measure_nodes
from .quadrature import TensorGrid, gauss_hermite_grid


def gaussian_reference_entropy(n: int) -> float:
    """Entropy of the standard Gaussian relative to Lebesgue measure."""
    return -0.5 * n * math.log(2.0 * math.pi * math.e)


@dataclass(frozen=True)
class BoundResult:
    lhs: float
    rhs: float
    vacuous: bool = False
    note: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


# ---------------------------------------------------------------------------
# log-det and trace entropy bounds


def dembo_bound(mu: DensityModel, grid: TensorGrid | None = None) -> BoundResult:
    """Entropy gap vs half the log-determinant of the relative Fisher matrix."""
    n = mu.dim
    lhs = relative_entropy(mu, LEBESGUE, grid).value - gaussian_reference_entropy(n)
    info = fisher_matrix(mu, LEBESGUE, grid).array
    w, _ = sym_eig(info)
    if np.min(w) <= 1e-12:
        return BoundResult(lhs, float("-inf"), vacuous=True,
                           note=f"Fisher matrix numerically singular (min eigenvalue {np.min(w):.3e})")
    rhs = 0.5 * float(np.sum(np.log(w)))
    return BoundResult(lhs, rhs, extras={"fisher": info})


def dimensional_bound(mu: DensityModel, grid: TensorGrid | None = None) -> BoundResult:
    """Entropy gap vs (n/2) log(scalar Fisher / n)."""
    n = mu.dim
    lhs = relative_entropy(mu, LEBESGUE, grid).value - gaussian_reference_entropy(n)
    info = fisher_matrix(mu, LEBESGUE, grid).array
    tr = float(np.trace(info))
    if tr <= 0:
        raise ValidationError(f"nonpositive scalar Fisher information {tr:.3e}")
    rhs = 0.5 * n * math.log(tr / n)
    return BoundResult(lhs, rhs, extras={"fisher": info})


# ---------------------------------------------------------------------------
# homogeneous reference measures


@dataclass(frozen=True)
class HomogeneousMeasureSpec:
    """Reference measure with coordinate scaling weights and LSI constants.

    density is the (possibly non-normalized) reference density w; reference
    names how Fisher components are taken ("lebesgue" or a DensityModel).
    """

    weights: np.ndarray
    c1: float
    c2: float
    density: Callable[[np.ndarray], float] = lambda x: 1.0
    reference: object = LEBESGUE

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if np.any(w < 0):
            raise ValidationError("homogeneity weights must be nonnegative")
        if self.c1 <= 0:
            raise ValidationError("c1 must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.weights.size


def lebesgue_homogeneous(n: int) -> HomogeneousMeasureSpec:
    """Canonical spec for the Lebesgue reference: reproduces the diagonal
    log-det entropy bound exactly."""
    c2 = gaussian_reference_entropy(n) - 0.5 * n
    return HomogeneousMeasureSpec(np.zeros(n), 0.5, c2)


def verify_homogeneity(spec: HomogeneousMeasureSpec, rng: np.random.Generator,
                       n_samples: int = 50, tol: float = 1e-8) -> bool:
    for _ in range(n_samples):
        x = rng.uniform(0.3, 2.0, size=spec.dim) * rng.choice([-1.0, 1.0], size=spec.dim)
        t = rng.uniform(0.5, 2.0, size=spec.dim)
        lhs = spec.density(t * x)
        rhs = float(np.prod(t**spec.weights)) * spec.density(x)
        if abs(lhs - rhs) > tol * max(1.0, abs(rhs)):
            return False
    return True


def _fisher_diagonal(mu: DensityModel, reference, grid: TensorGrid | None) -> np.ndarray:
    n = mu.dim
    out = np.empty(n)
    for k in range(n):
        def gk(pts, _k=k):
            s = mu.grad_batch(pts)[:, _k] / mu.eval_batch(pts)
            if reference != LEBESGUE:
                s = s - reference.grad_batch(pts)[:, _k] / reference.eval_batch(pts)
            return s * s
        out[k], _ = integrate(gk, mu, grid)
    return out


def homogeneous_objective(components: np.ndarray, spec: HomogeneousMeasureSpec,
                          t: np.ndarray) -> float:
    """Fixed-scale upper bound sum_k [c1 t_k^2 I_k - (1+p_k) log t_k] + c2."""
    t = np.asarray(t, dtype=float)
    p = spec.weights
    return float(np.sum(spec.c1 * t**2 * components - (1.0 + p) * np.log(t)) + spec.c2)


def homogeneous_lsi_bound(mu: DensityModel, spec: HomogeneousMeasureSpec,
                          grid: TensorGrid | None = None) -> BoundResult:
    """Entropy vs the scale-optimized sum of per-coordinate Fisher terms."""
    if spec.dim != mu.dim:
        raise ValidationError("spec dimension does not match the measure")
    components = _fisher_diagonal(mu, spec.reference, grid)
    if np.any(components <= 0):
        k = int(np.argmin(components))
        return BoundResult(float("nan"), float("inf"), vacuous=True,
                           note=f"coordinate {k} has zero Fisher component; bound is vacuous")
    p = spec.weights
    t_opt = np.sqrt((1.0 + p) / (2.0 * spec.c1 * components))
    rhs = 0.5 * float(np.sum((1.0 + p) * np.log(2.0 * math.e * spec.c1 / (1.0 + p) * components))) + spec.c2
    lhs = relative_entropy(mu, spec.reference, grid).value
    return BoundResult(lhs, rhs, extras={"optimal_t": t_opt, "components": components})


# ---------------------------------------------------------------------------
# smooth scalar fields (not densities): value + gradient


@dataclass(frozen=True)
class SmoothField:
    """Scalar field with gradient, both vectorized over (N, n) point arrays."""

    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    box: Optional[tuple] = None


# ---------------------------------------------------------------------------
# Gagliardo-Nirenberg-Sobolev with geometric-mean gradient term


@dataclass(frozen=True)
class GNSParams:
    p: float
    q: float
    r: float
    theta: float
    n: int
    constant: Optional[float] = None

    def __post_init__(self):
        if min(self.p, self.q, self.r) < 1:
            raise ValidationError("exponents must be >= 1")
        lhs = 1.0 / self.p
        rhs = self.theta / self.q + (1.0 / self.r - 1.0 / self.n) * (1.0 - self.theta)
        if abs(lhs - rhs) > 1e-12:
            raise ValidationError(f"interpolation constraint violated by {abs(lhs-rhs):.3e}")
        if not (0.0 <= self.theta <= 1.0):
            raise ValidationError("theta must lie in [0, 1]")

    @classmethod
    def from_exponents(cls, p: float, q: float, r: float, n: int,
                       constant: Optional[float] = None) -> "GNSParams":
        denom = 1.0 / q - 1.0 / r + 1.0 / n
        if abs(denom) < 1e-14:
            raise ValidationError("degenerate exponent combination")
        theta = (1.0 / p - 1.0 / r + 1.0 / n) / denom
        return cls(p, q, r, theta, n, constant)


def _box_norm(vals_fn, p: float, grid: TensorGrid) -> float:
    return float(grid.integrate(lambda pts: np.abs(np.asarray(vals_fn(pts), dtype=float)) ** p) ** (1.0 / p))


def gns_improved(u: SmoothField, params: GNSParams, grid: TensorGrid) -> BoundResult:
    """Interpolation inequality with the gradient term replaced by the
    geometric mean of the partial-derivative norms."""
    n = u.dim
    if params.n != n:
        raise ValidationError("parameter dimension does not match the field")
    th = params.theta
    lhs = _box_norm(u.value, params.p, grid)
    uq = _box_norm(u.value, params.q, grid)
    dnorms = np.array([
        _box_norm(lambda pts, _j=j: u.grad(pts)[:, _j], params.r, grid) for j in range(n)
    ])
    grad_norm = float(np.sum(dnorms**params.r) ** (1.0 / params.r))
    c = 1.0 if params.constant is None else params.constant

    if th == 1.0:
        classical = improved = c * uq
    else:
        classical = c * uq**th * grad_norm ** (1.0 - th)
        geo = float(np.prod(dnorms ** ((1.0 - th) / n)))
        improved = c * n ** ((1.0 - th) / params.r) * uq**th * geo

    note = ""
    if th < 1.0 and np.any(dnorms == 0.0):
        note = "some partial derivative vanishes identically; a nonzero function cannot do this"
    return BoundResult(
        lhs, improved, note=note,
        extras={"rhs_classical": classical, "partial_norms": dnorms,
                "constant_supplied": params.constant is not None},
    )


@dataclass(frozen=True)
class Axis1D:
    """One factor of a product field: scalar profile with derivative."""

    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]


def normalize_axis_width(h, dh, b_max: float = 20.0) -> Axis1D:
    """Damp a 1-d profile as h(x) exp(-b x^2 / 2), choosing b so that the
    Gaussian averages of x^2 g^2 and g^2 coincide.

    This is what makes products of such profiles satisfy the second-moment
    normalization: off-diagonal entries vanish by the product structure, and
    each diagonal entry matches the squared norm by construction.
    """
    from scipy.optimize import brentq

    nodes, w = np.polynomial.hermite_e.hermegauss(120)
    w = w / math.sqrt(2.0 * math.pi)
    hv = np.asarray(h(nodes), dtype=float)

    def resid(b):
        g2 = hv**2 * np.exp(-b * nodes**2)
        return float(np.dot(w, nodes**2 * g2) - np.dot(w, g2))

    lo, hi2 = -0.45, 0.5  # keep integrability against the Gaussian weight; b > -1 + x2-decay margin
    while resid(hi2) > 0 and hi2 < b_max:
        hi2 *= 2.0
    if resid(lo) < 0:
        # already concentrated; search negative side toward the integrability limit
        while resid(lo) < 0 and lo > -0.9:
            lo = -0.9 + 0.5 * (lo + 0.9)
            if lo < -0.89:
                break
    if resid(lo) * resid(hi2) > 0:
        raise ValidationError("could not bracket the width-normalizing damping")
    b = brentq(resid, lo, hi2, xtol=1e-13)

    def value(x):
        x = np.asarray(x, dtype=float)
        return np.asarray(h(x), dtype=float) * np.exp(-0.5 * b * x**2)

    def deriv(x):
        x = np.asarray(x, dtype=float)
        e = np.exp(-0.5 * b * x**2)
        return np.asarray(dh(x), dtype=float) * e - b * x * np.asarray(h(x), dtype=float) * e

    return Axis1D(value, deriv)


def product_field(axes: list[Axis1D]) -> SmoothField:
    n = len(axes)

    def value(pts):
        pts = np.atleast_2d(pts)
        out = np.ones(pts.shape[0])
        for i, ax in enumerate(axes):
            out *= np.asarray(ax.value(pts[:, i]), dtype=float)
        return out

    def grad(pts):
        pts = np.atleast_2d(pts)
        vals = [np.asarray(ax.value(pts[:, i]), dtype=float) for i, ax in enumerate(axes)]
        total = np.prod(np.stack(vals), axis=0)
        out = np.empty((pts.shape[0], n))
        for i, ax in enumerate(axes):
            d = np.asarray(ax.deriv(pts[:, i]), dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(np.abs(vals[i]) > 1e-300, total / vals[i], 0.0)
            out[:, i] = d * ratio
        return out

    return SmoothField(n, value, grad)


# ---------------------------------------------------------------------------
# sharpened Gaussian Poincare-type bound with matrix refinement


def beckner_improved(u: SmoothField, p: float, grid: TensorGrid | None = None,
                     norm_tol: float = 1e-6) -> BoundResult:
    """Normalized L2-Lp gap vs determinant and trace refinements.

    Requires the second-moment normalization: the matrix of x_i x_j u^2
    Gaussian averages must equal ||u||_2^2 times the identity.
    """
    if not (1.0 <= p < 2.0):
        raise ValidationError(f"need p in [1, 2), got {p}")
    n = u.dim
    if grid is None:
        grid = gauss_hermite_grid(n)

    u2 = grid.integrate(lambda pts: np.asarray(u.value(pts), dtype=float) ** 2)
    up = grid.integrate(lambda pts: np.abs(np.asarray(u.value(pts), dtype=float)) ** p) ** (2.0 / p)
    m2 = weighted_second_moment_matrix(u.value, grid).array
    dev = m2 - u2 * np.eye(n)
    if np.max(np.abs(dev)) > norm_tol * max(1.0, u2):
        i, j = np.unravel_index(np.argmax(np.abs(dev)), dev.shape)
        raise ValidationError(
            f"second-moment normalization violated at ({i},{j}): deviation {dev[i, j]:.3e}"
        )

    def outer(pts):
        g = np.asarray(u.grad(pts), dtype=float)
        return np.einsum("ki,kj->kij", g, g)

    mgrad = grid.integrate_vector(outer)
    mgrad = 0.5 * (mgrad + mgrad.T)
    alpha = (2.0 - p) / (2.0 * p)
    w, _ = sym_eig(4.0 * mgrad / u2 + np.eye(n))
    rhs_matrix = 1.0 - math.exp(-alpha * float(np.sum(np.log(w))))
    tr = float(np.trace(mgrad))
    rhs_trace = 1.0 - (1.0 + 4.0 * tr / (n * u2)) ** (-n * alpha)
    lhs = (u2 - up) / u2
    return BoundResult(lhs, rhs_matrix,
                       extras={"rhs_trace": rhs_trace, "grad_matrix": mgrad, "u2": u2})


def entropy_logdet_lemma(u: SmoothField, grid: TensorGrid | None = None) -> BoundResult:
    """Ent of u^2 under the Gaussian vs half the log-det of 4*grad matrix + Id,
    for u normalized to unit L2."""
    n = u.dim
    if grid is None:
        grid = gauss_hermite_grid(n)
    u2 = grid.integrate(lambda pts: np.asarray(u.value(pts), dtype=float) ** 2)
    if abs(u2 - 1.0) > 1e-6:
        raise ValidationError(f"u must be L2-normalized, got ||u||^2 = {u2:.6f}")

    def ent_integrand(pts):
        v = np.asarray(u.value(pts), dtype=float) ** 2
        return np.where(v > 0, v * np.log(np.where(v > 0, v, 1.0)), 0.0)

    lhs = grid.integrate(ent_integrand)

    def outer(pts):
        g = np.asarray(u.grad(pts), dtype=float)
        return np.einsum("ki,kj->kij", g, g)

    mgrad = grid.integrate_vector(outer)
    w, _ = sym_eig(4.0 * mgrad + np.eye(n))
    rhs = 0.5 * float(np.sum(np.log(w)))
    return BoundResult(lhs, rhs)


# ---------------------------------------------------------------------------
# q-entropy bound with per-coordinate scale optimization


def _minimize_strictly_convex(dphi, d2phi, s0: float = 0.0, tol: float = 1e-10,
                              max_iter: int = 200) -> float:
    """Root of dphi by Newton, safeguarded by a sign-change bracket."""
    lo, hi = -60.0, 60.0
    if dphi(lo) > 0 or dphi(hi) < 0:
        raise ValidationError("derivative has no sign change on the search interval")
    s = s0
    for _ in range(max_iter):
        d = dphi(s)
        if abs(d) < tol:
            return s
        if d > 0:
            hi = s
        else:
            lo = s
        step = d / d2phi(s)
        s_new = s - step
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        s = s_new
    return s


def qlsi_improved(mu: DensityModel, q: float, c_tilde: float,
                  grid: TensorGrid | None = None) -> BoundResult:
    """Entropy vs per-coordinate optimized q-moment bound, q in (1, 2)."""
    if not (1.0 < q < 2.0):
        raise ValidationError(f"need q in (1, 2), got {q}")
    if c_tilde <= 0:
        raise ValidationError("the constant must be positive")
    p = q / (q - 1.0)
    n = mu.dim

    a = np.empty(n)
    b = np.empty(n)
    for k in range(n):
        def ga(pts, _k=k):
            s = mu.grad_batch(pts)[:, _k] / mu.eval_batch(pts)
            return np.abs(s) ** q
        def gb(pts, _k=k):
            return np.abs(np.atleast_2d(pts)[:, _k]) ** p
        a[k], _ = integrate(ga, mu, grid)
        b[k], _ = integrate(gb, mu, grid)

    if np.any(a <= 0):
        k = int(np.argmin(a))
        return BoundResult(float("nan"), float("-inf"), vacuous=True,
                           note=f"coordinate {k} has zero q-score moment; objective unbounded below")

    s_opt = np.empty(n)
    total = 0.0
    for k in range(n):
        ak, bk = a[k], b[k]
        def dphi(s, _a=ak, _b=bk):
            return c_tilde * (q * _a * math.exp(q * s) - p * _b * math.exp(-p * s)) - 1.0
        def d2phi(s, _a=ak, _b=bk):
            return c_tilde * (q * q * _a * math.exp(q * s) + p * p * _b * math.exp(-p * s))
        s_opt[k] = _minimize_strictly_convex(dphi, d2phi)
        total += c_tilde * (ak * math.exp(q * s_opt[k]) + bk * math.exp(-p * s_opt[k])) - s_opt[k]

    lhs = relative_entropy(mu, LEBESGUE, grid).value
    return BoundResult(lhs, total, extras={"optimal_t": np.exp(s_opt), "a": a, "b": b})


def qlsi_objective(a: float, b: float, q: float, c_tilde: float, t: float) -> float:
    p = q / (q - 1.0)
    return c_tilde * (a * t**q + b * t**(-p)) - math.log(t)


# ---------------------------------------------------------------------------
# Bayesian information bounds


@dataclass(frozen=True)
class GaussianChannelFamily:
    """Location family: observation = parameter + sigma * standard normal."""

    sigma: float
    dim: int

    tag = "gaussian-channel"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValidationError("channel width must be positive")

    def fisher_per_theta(self) -> np.ndarray:
        return np.eye(self.dim) / self.sigma**2


@dataclass(frozen=True)
class FiniteFamily:
    """Family of distributions on a finite outcome set, smooth in theta.

    prob(theta) -> (k,) probabilities; dprob(theta) -> (k, n) gradients.
    """

    n_outcomes: int
    theta_dim: int
    prob: Callable[[np.ndarray], np.ndarray]
    dprob: Callable[[np.ndarray], np.ndarray]

    tag = "finite"

    def check_regularity(self, thetas: np.ndarray, tol: float = 1e-6):
        """Outcome-summed parameter gradients must vanish (mass conservation)."""
        for th in np.atleast_2d(thetas):
            g = np.asarray(self.dprob(th), dtype=float)
            worst = float(np.max(np.abs(g.sum(axis=0))))
            if worst > tol:
                raise ValidationError(f"family gradients do not sum to zero at {th}: {worst:.3e}")

    def fisher_at(self, th: np.ndarray) -> np.ndarray:
        pr = np.asarray(self.prob(th), dtype=float)
        dg = np.asarray(self.dprob(th), dtype=float)
        mask = pr > 0
        return np.einsum("ki,kj->ij", dg[mask] / pr[mask, None], dg[mask])


def _gaussian_channel_regularity(family: GaussianChannelFamily, tol: float = 1e-6):
    # gradient in theta of the channel density integrates to zero over the
    # observation space; checked on a wide 1-d slice per axis
    from scipy.integrate import quad

    s = family.sigma
    val, _ = quad(lambda x: (x / s**2) * math.exp(-0.5 * x * x / s**2) / math.sqrt(2 * math.pi * s**2),
                  -10 * s, 10 * s)
    if abs(val) > tol:
        raise ValidationError(f"channel regularity check failed: {val:.3e}")


def mutual_information_gaussian_channel(pi: DensityModel, sigma: float,
                                        grid: TensorGrid | None = None) -> float:
    """I(prior; posterior family) for the additive Gaussian channel."""
    n = pi.dim
    if pi.gaussian is not None:
        cov = pi.gaussian.covariance
        w, _ = sym_eig(np.eye(n) + cov / sigma**2)
        return 0.5 * float(np.sum(np.log(w)))
    if n != 1:
        raise UnsupportedRegimeError("nested-quadrature mutual information implemented for 1-d priors only")
    th_pts, th_w = measure_nodes(pi, grid if grid is not None else pi.default_grid(m=60))
    x_nodes, x_w = np.polynomial.hermite_e.hermegauss(80)
    x_w = x_w / math.sqrt(2.0 * math.pi)

    # observations on a per-theta grid: obs[i, j] = theta_i + sigma z_j
    obs = th_pts[:, 0][:, None] + sigma * x_nodes[None, :]
    lognorm = -0.5 * math.log(2.0 * math.pi * sigma**2)
    log_cond = lognorm - 0.5 * x_nodes**2  # log p(obs[i,j] | theta_i)
    # marginal at each observation point: prior-average of the channel density
    d = obs[:, :, None] - th_pts[:, 0][None, None, :]
    pbar = np.einsum("k,ijk->ij", th_w, np.exp(lognorm - 0.5 * d * d / sigma**2))
    kl_rows = np.dot(log_cond[None, :] - np.log(pbar), x_w)
    return float(np.dot(th_w, kl_rows))


def cramer_rao_gaussian(pi: DensityModel, family: GaussianChannelFamily,
                        grid: TensorGrid | None = None) -> BoundResult:
    """Mutual information plus prior entropy vs the Gaussian-reference bound."""
    if family.tag != "gaussian-channel":
        raise ValidationError("this form needs the additive Gaussian channel")
    n = pi.dim
    if family.dim != n:
        raise ValidationError("family dimension mismatch")
    _gaussian_channel_regularity(family)

    gamma = make_gaussian(GaussianSpec(np.zeros(n), np.eye(n)))
    h_prior = relative_entropy(pi, gamma, grid).value
    info_prior = fisher_matrix(pi, gamma, grid).array
    if pi.gaussian is not None:
        cov = pi.gaussian.covariance
        mean = pi.gaussian.mean
        m2 = cov + np.outer(mean, mean)
    else:
        def m2fn(pts):
            return np.einsum("ki,kj->kij", pts, pts)
        grid_eff = grid if grid is not None else pi.default_grid()
        # second moment under the prior
        m2 = np.zeros((n, n))
        for i in range(n):
            for j in range(i, n):
                val, _ = integrate(lambda pts, _i=i, _j=j: pts[:, _i] * pts[:, _j], pi, grid_eff)
                m2[i, j] = m2[j, i] = val
    mi = mutual_information_gaussian_channel(pi, family.sigma, grid)
    lhs = mi + h_prior
    inner = 2.0 * np.eye(n) + info_prior + family.fisher_per_theta() - m2
    w, _ = sym_eig(inner)
    if np.min(w) <= 0:
        return BoundResult(lhs, float("inf"), vacuous=True,
                           note="argument of the log-det not positive definite")
    rhs = 0.5 * (float(np.trace(m2)) - n) + 0.5 * float(np.sum(np.log(w)))
    return BoundResult(lhs, rhs, extras={"mutual_information": mi, "prior_entropy": h_prior})


def cramer_rao_homogeneous(pi: DensityModel, family, grid: TensorGrid | None = None,
                           theta_grid: TensorGrid | None = None) -> BoundResult:
    """Diagonal-Fisher form against the Lebesgue reference."""
    n = pi.dim
    components = _fisher_diagonal(pi, LEBESGUE, grid)

    if isinstance(family, GaussianChannelFamily):
        _gaussian_channel_regularity(family)
        j_diag = np.full(n, 1.0 / family.sigma**2)
        mi = mutual_information_gaussian_channel(pi, family.sigma, grid)
    elif isinstance(family, FiniteFamily):
        if family.theta_dim != n:
            raise ValidationError("family parameter dimension mismatch")
        rng_check = np.random.default_rng(0)
        family.check_regularity(rng_check.uniform(-2, 2, size=(10, n)))
        j_diag = np.empty(n)
        for k in range(n):
            def gk(pts, _k=k):
                return np.asarray([family.fisher_at(t)[_k, _k] for t in np.atleast_2d(pts)])
            j_diag[k], _ = integrate(gk, pi, theta_grid)
        mi = _finite_family_mutual_information(pi, family, theta_grid)
    else:
        raise ValidationError(f"unknown family type {type(family).__name__}")

    lhs = mi + relative_entropy(pi, LEBESGUE, grid).value
    total = components + j_diag
    if np.any(total <= 0):
        return BoundResult(lhs, float("-inf"), vacuous=True, note="zero combined information component")
    rhs = 0.5 * float(np.sum(np.log(total))) + gaussian_reference_entropy(n)
    return BoundResult(lhs, rhs, extras={"mutual_information": mi,
                                         "prior_components": components, "channel_components": j_diag})


def _finite_family_mutual_information(pi: DensityModel, family: FiniteFamily,
                                      theta_grid: TensorGrid | None) -> float:
    k = family.n_outcomes

    def probs_batch(pts):
        return np.stack([np.asarray(family.prob(t), dtype=float) for t in np.atleast_2d(pts)])

    pbar = np.empty(k)
    for x in range(k):
        pbar[x], _ = integrate(lambda pts, _x=x: probs_batch(pts)[:, _x], pi, theta_grid)

    def kl_to_marginal(pts):
        pr = probs_batch(pts)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(pr > 0, pr * (np.log(np.where(pr > 0, pr, 1.0)) - np.log(pbar)[None, :]), 0.0)
        return terms.sum(axis=1)

    val, _ = integrate(kl_to_marginal, pi, theta_grid)
    return val


# ---------------------------------------------------------------------------
# product transport maps and the entropy deficit functional


@dataclass(frozen=True)
class Diffeo1D:
    """Increasing bijection of the line with two derivatives and an inverse."""

    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    second: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]


def identity_diffeo() -> Diffeo1D:
    return Diffeo1D(lambda y: y, lambda y: np.ones_like(y), lambda y: np.zeros_like(y), lambda x: x)


def linear_diffeo(a: float) -> Diffeo1D:
    if a <= 0:
        raise ValidationError("slope must be positive for an increasing map")
    return Diffeo1D(lambda y: a * y, lambda y: np.full_like(y, a), lambda y: np.zeros_like(y),
                    lambda x: x / a)


def cdf_transport_diffeo(f, fprime, lo: float, hi: float, n_table: int = 2048) -> Diffeo1D:
    """Monotone map sending the standard 1-d Gaussian onto the density f on
    [lo, hi], built by matching cumulative distributions on a table.

    Derivatives use the mass-balance identity f(tau(y)) tau'(y) = phi(y)
    rather than differentiating the interpolant.
    """
    from scipy.integrate import cumulative_simpson

    xs = np.linspace(lo, hi, n_table)
    fx = np.asarray([f(x) for x in xs], dtype=float)
    if np.any(fx <= 0):
        raise ValidationError("density must be positive on the table interval")
    cdf = cumulative_simpson(fx, x=xs, initial=0.0)
    total = cdf[-1]
    cdf = cdf / total
    # strictly increasing for Pchip
    cdf = np.maximum.accumulate(cdf + np.arange(n_table) * 1e-15)
    quantile = PchipInterpolator(cdf, xs, extrapolate=True)
    fwd_cdf = PchipInterpolator(xs, cdf, extrapolate=True)

    def value(y):
        return np.asarray(quantile(ndtr(np.asarray(y, dtype=float))), dtype=float)

    def deriv(y):
        y = np.asarray(y, dtype=float)
        x = value(y)
        phi = np.exp(-0.5 * y * y) / math.sqrt(2.0 * math.pi)
        return phi / (np.asarray([f(t) for t in np.atleast_1d(x)], dtype=float).reshape(x.shape) / total)

    def second(y):
        y = np.asarray(y, dtype=float)
        x = np.atleast_1d(value(y))
        tp = np.atleast_1d(deriv(y))
        score = np.asarray([fprime(t) for t in x], dtype=float) / np.asarray([f(t) for t in x], dtype=float)
        return (tp * (-np.atleast_1d(y) - score * tp)).reshape(np.shape(y))

    def inverse(x):
        u = np.clip(np.asarray(fwd_cdf(np.asarray(x, dtype=float)), dtype=float), 1e-15, 1 - 1e-15)
        return np.asarray(ndtri(u), dtype=float)

    return Diffeo1D(value, deriv, second, inverse)


@dataclass(frozen=True)
class DiffeoSpec:
    components: tuple

    @property
    def dim(self) -> int:
        return len(self.components)


def transport_deficit(mu: DensityModel, transport: DiffeoSpec,
                      grid: TensorGrid | None = None) -> float:
    """Deficit functional of a product map against the measure's entropy gap.

    Evaluates, coordinate by coordinate at y_i the preimage of x_i,
      (1/2) (tau_i'(y_i) d_i log f(x) + tau_i''(y_i)/tau_i'(y_i))^2
        - log tau_i'(y_i) - 1/2
    averaged over the measure.  Zero exactly when the map carries the
    standard Gaussian onto the measure.
    """
    n = mu.dim
    if transport.dim != n:
        raise ValidationError("transport dimension mismatch")

    def integrand(pts):
        pts = np.atleast_2d(pts)
        scores = mu.grad_batch(pts) / mu.eval_batch(pts)[:, None]
        out = np.zeros(pts.shape[0])
        for i, tau in enumerate(transport.components):
            y = np.asarray(tau.inverse(pts[:, i]), dtype=float)
            tp = np.asarray(tau.deriv(y), dtype=float)
            if np.any(tp <= 0):
                raise ValidationError(f"component {i} has nonpositive derivative on the domain")
            tpp = np.asarray(tau.second(y), dtype=float)
            out += 0.5 * (tp * scores[:, i] + tpp / tp) ** 2 - np.log(tp) - 0.5
        return out

    val, _ = integrate(integrand, mu, grid)
    return val
