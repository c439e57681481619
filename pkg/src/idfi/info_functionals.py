"""Entropy, Fisher information, norms, and discrete Dirichlet forms.

Relative quantities are taken against either Lebesgue measure or a second
density; Gaussian-vs-Lebesgue cases short-circuit to closed forms and tag the
result as analytic.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .config import DISCRETE_DERIVATIVE_FACTOR
from .errors import ValidationError
from .linalg import SymMatrix, as_symmetric
from .measures import DensityModel, DiscreteProductSpace, integrate
from .quadrature import TensorGrid, gauss_hermite_grid

LEBESGUE = "lebesgue"


@dataclass(frozen=True)
class EntropyValue:
    value: float
    estimator: str  # analytic | quadrature | monte-carlo
    error: float

    def __post_init__(self):
        if self.error < 0:
            raise ValidationError("error estimate must be nonnegative")


@dataclass(frozen=True)
class FisherMatrix:
    matrix: SymMatrix

    @property
    def trace(self) -> float:
        return self.matrix.trace

    @property
    def array(self) -> np.ndarray:
        return self.matrix.array


def _gaussian_entropy_vs_lebesgue(mu: DensityModel) -> float:
    n = mu.dim
    _, ld = np.linalg.slogdet(mu.gaussian.covariance)
    return -0.5 * n * math.log(2.0 * math.pi * math.e) - 0.5 * ld


def relative_entropy(mu: DensityModel, nu=LEBESGUE, grid: TensorGrid | None = None) -> EntropyValue:
    """H(mu || nu) = integral of log(dmu/dnu) dmu."""
    if nu == LEBESGUE:
        if mu.kind == "gaussian" and mu.gaussian is not None:
            return EntropyValue(_gaussian_entropy_vs_lebesgue(mu), "analytic", 0.0)

        def logratio(pts):
            vals = mu.eval_batch(pts)
            if np.any(~np.isfinite(vals)) or np.any(vals <= 0.0):
                bad = np.atleast_2d(pts)[np.argmin(vals)]
                raise ValidationError(f"density not positive at node {bad}")
            return np.log(vals)
    else:
        if nu.dim != mu.dim:
            raise ValidationError("dimension mismatch between the two densities")

        def logratio(pts):
            num = mu.eval_batch(pts)
            den = nu.eval_batch(pts)
            if np.any(den <= 0.0) or np.any(num <= 0.0):
                raise ValidationError("density ratio not positive on the integration domain")
            return np.log(num) - np.log(den)

    val, err = integrate(logratio, mu, grid)
    return EntropyValue(val, "quadrature", err)


def fisher_matrix(mu: DensityModel, nu=LEBESGUE, grid: TensorGrid | None = None) -> FisherMatrix:
    """Relative Fisher information matrix: integral of (grad log(dmu/dnu))^{x2} dmu."""
    n = mu.dim
    if nu == LEBESGUE and mu.kind == "gaussian" and mu.gaussian is not None:
        prec = np.linalg.inv(mu.gaussian.covariance)
        return FisherMatrix(SymMatrix(prec))

    if grid is None:
        grid = mu.default_grid()

    def score_batch(pts):
        s = mu.grad_batch(pts) / mu.eval_batch(pts)[:, None]
        if nu != LEBESGUE:
            s = s - nu.grad_batch(pts) / nu.eval_batch(pts)[:, None]
        return s

    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            def gij(pts, _i=i, _j=j):
                s = score_batch(pts)
                return s[:, _i] * s[:, _j]
            out[i, j], _ = integrate(gij, mu, grid)
            out[j, i] = out[i, j]
    return FisherMatrix(SymMatrix(as_symmetric(out)))


def fisher_scalar(mu: DensityModel, nu=LEBESGUE, grid: TensorGrid | None = None) -> float:
    """Scalar relative Fisher information, computed without forming the matrix."""
    if nu == LEBESGUE and mu.kind == "gaussian" and mu.gaussian is not None:
        return float(np.trace(np.linalg.inv(mu.gaussian.covariance)))

    def g(pts):
        s = mu.grad_batch(pts) / mu.eval_batch(pts)[:, None]
        if nu != LEBESGUE:
            s = s - nu.grad_batch(pts) / nu.eval_batch(pts)[:, None]
        return np.sum(s * s, axis=1)

    val, _ = integrate(g, mu, grid)
    return val


def entropy_functional(f, pi, grid: TensorGrid | None = None) -> EntropyValue:
    """Ent_pi[f] = E[f log f] - E[f] log E[f] for nonnegative f.

    pi is either a DensityModel (continuous, f maps (N, n) -> (N,)) or a
    DiscreteProductSpace (f maps states (N, n) ints -> (N,)).
    """
    if isinstance(pi, DiscreteProductSpace):
        vals = np.asarray(f(pi.states()), dtype=float)
        w = pi.state_weights()
        if np.any(vals < 0):
            raise ValidationError("entropy functional needs a nonnegative function")
        ef = float(np.dot(w, vals))
        if ef <= 0:
            raise ValidationError("function is identically zero")
        with np.errstate(divide="ignore", invalid="ignore"):
            flogf = np.where(vals > 0, vals * np.log(np.where(vals > 0, vals, 1.0)), 0.0)
        val = float(np.dot(w, flogf)) - ef * math.log(ef)
        return EntropyValue(max(val, 0.0) if val > -1e-14 else val, "analytic", 0.0)

    def clipped(pts):
        vals = np.asarray(f(pts), dtype=float)
        if np.any(vals < 0):
            raise ValidationError("entropy functional needs a nonnegative function")
        return vals

    ef, err1 = integrate(clipped, pi, grid)
    if ef <= 0:
        raise ValidationError("function is identically zero")

    def flogf(pts):
        vals = clipped(pts)
        return np.where(vals > 0, vals * np.log(np.where(vals > 0, vals, 1.0)), 0.0)

    eflf, err2 = integrate(flogf, pi, grid)
    return EntropyValue(eflf - ef * math.log(ef), "quadrature", err1 + err2)


def lp_norm(u, p: float, weight: str = "gaussian", grid: TensorGrid | None = None, dim: int = 1) -> float:
    """(integral of |u|^p against the weight)^(1/p).  u maps (N, n) -> (N,)."""
    if p < 1:
        raise ValidationError(f"need p >= 1, got {p}")
    if weight == "gaussian":
        if grid is None:
            grid = gauss_hermite_grid(dim)
        val = grid.integrate(lambda pts: np.abs(np.asarray(u(pts), dtype=float)) ** p)
    elif weight == LEBESGUE:
        if grid is None:
            raise ValidationError("Lebesgue norms need an explicit box grid")
        val = grid.integrate(lambda pts: np.abs(np.asarray(u(pts), dtype=float)) ** p)
    else:
        raise ValidationError(f"unknown weight {weight!r}")
    return float(val ** (1.0 / p))


def weighted_second_moment_matrix(u, grid: TensorGrid) -> SymMatrix:
    """M_ij = integral of x_i x_j u(x)^2 against N(0, Id)."""
    n = grid.dim

    def f(pts):
        vals = np.asarray(u(pts), dtype=float) ** 2
        return np.einsum("ki,kj,k->kij", pts, pts, vals)

    m = grid.integrate_vector(f)
    return SymMatrix(as_symmetric(m))


def discrete_derivative(f_vals: np.ndarray, space: DiscreteProductSpace, states: np.ndarray,
                        f, i: int, c_conv: float = DISCRETE_DERIVATIVE_FACTOR) -> np.ndarray:
    """d_i f = c_conv * (f(x) - f(x with coordinate i flipped)); two-point factors only."""
    if space.k != 2:
        raise ValidationError("discrete derivatives are defined on two-point factors")
    flipped = states.copy()
    flipped[:, i] = 1 - flipped[:, i]
    return c_conv * (f_vals - np.asarray(f(flipped), dtype=float))


def dirichlet_form_coordinate(f, g, i: int, space: DiscreteProductSpace,
                              c_conv: float = DISCRETE_DERIVATIVE_FACTOR) -> float:
    """E_mu[d_i f * d_i g] under the product measure."""
    states = space.states()
    fv = np.asarray(f(states), dtype=float)
    gv = np.asarray(g(states), dtype=float)
    df = discrete_derivative(fv, space, states, f, i, c_conv)
    dg = discrete_derivative(gv, space, states, g, i, c_conv)
    return float(np.dot(space.state_weights(), df * dg))


def hadamard_jensen_chain(info: np.ndarray) -> tuple[float, float, float]:
    """(1/2) log det I <= (1/2) sum_k log I_kk <= (n/2) log(tr I / n) for PD I."""
    info = as_symmetric(info)
    n = info.shape[0]
    sign, ld = np.linalg.slogdet(info)
    if sign <= 0:
        raise ValidationError("chain needs a positive-definite matrix")
    left = 0.5 * ld
    mid = 0.5 * float(np.sum(np.log(np.diag(info))))
    right = 0.5 * n * math.log(float(np.trace(info)) / n)
    return left, mid, right
