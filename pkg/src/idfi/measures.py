"""Probability densities on R^n and finite product spaces.

Continuous densities carry exact gradients and Hessians (chain-ruled through
every constructor) so that Fisher-type functionals never rely on finite
differences.  Discrete spaces are small enough to enumerate outright.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional
import math

import numpy as np

from .config import ENUMERATION_STATE_CAP, FD_STEP_FIRST, FD_STEP_SECOND
from .errors import ValidationError
from .linalg import as_symmetric, sym_eig
from .quadrature import TensorGrid, gauss_hermite_grid, gauss_legendre_box


@dataclass(frozen=True)
class GaussianSpec:
    """Mean vector and positive-definite covariance."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.mean, dtype=float))
        c = as_symmetric(self.covariance)
        if m.ndim != 1 or c.shape[0] != m.size:
            raise ValidationError(f"mean shape {m.shape} incompatible with covariance {c.shape}")
        w, _ = sym_eig(c)
        if np.min(w) <= 0.0:
            raise ValidationError(f"covariance not positive definite (min eigenvalue {np.min(w):.3e})")
        m.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "covariance", c)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class DensityModel:
    """Positive density with exact first and second derivatives.

    eval/grad/hess accept a single point (n,).  eval_batch accepts (N, n) and
    is what quadrature uses; constructors provide vectorized versions where
    the closed form allows it.
    """

    dim: int
    eval: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    kind: str
    eval_batch: Callable[[np.ndarray], np.ndarray]
    grad_batch: Callable[[np.ndarray], np.ndarray]
    # integration domain: None means "use the Gaussian rule on R^n"
    box: Optional[tuple[np.ndarray, np.ndarray]] = None
    gaussian: Optional[GaussianSpec] = None
    # retained mixture structure: (components, weights); lets integration
    # decompose into per-component rules that track each component's frame
    mixture: Optional[tuple] = None

    def default_grid(self, m: int | None = None) -> TensorGrid:
        kwargs = {} if m is None else {"m": m}
        if self.box is not None:
            return gauss_legendre_box(self.box[0], self.box[1], **kwargs)
        return gauss_hermite_grid(self.dim, **kwargs)

    def log_grad(self, x: np.ndarray) -> np.ndarray:
        return self.grad(x) / self.eval(x)


def _batch_from_scalar(fn, vector: bool = False):
    def batched(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.asarray([fn(p) for p in pts], dtype=float)

    return batched


def make_gaussian(spec: GaussianSpec) -> DensityModel:
    n = spec.dim
    prec = np.linalg.inv(spec.covariance)
    prec = 0.5 * (prec + prec.T)
    _, ld = np.linalg.slogdet(spec.covariance)
    lognorm = -0.5 * n * math.log(2.0 * math.pi) - 0.5 * ld
    mean = spec.mean

    def logf(x: np.ndarray) -> float:
        d = np.asarray(x, dtype=float) - mean
        return lognorm - 0.5 * d @ prec @ d

    def f(x: np.ndarray) -> float:
        return math.exp(logf(x))

    def g(x: np.ndarray) -> np.ndarray:
        d = np.asarray(x, dtype=float) - mean
        return -f(x) * (prec @ d)

    def h(x: np.ndarray) -> np.ndarray:
        d = np.asarray(x, dtype=float) - mean
        pd = prec @ d
        return f(x) * (np.outer(pd, pd) - prec)

    def f_batch(pts: np.ndarray) -> np.ndarray:
        d = np.atleast_2d(pts) - mean
        q = np.einsum("ij,jk,ik->i", d, prec, d)
        return np.exp(lognorm - 0.5 * q)

    def g_batch(pts: np.ndarray) -> np.ndarray:
        d = np.atleast_2d(pts) - mean
        return -f_batch(pts)[:, None] * (d @ prec)

    return DensityModel(
        dim=n, eval=f, grad=g, hess=h, kind="gaussian",
        eval_batch=f_batch, grad_batch=g_batch, gaussian=spec,
    )


def make_custom(
    dim: int,
    eval: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray] | None = None,
    hess: Callable[[np.ndarray], np.ndarray] | None = None,
    box: tuple | None = None,
    kind: str = "custom-analytic",
) -> DensityModel:
    """Wrap a hand-written density; missing derivatives fall back to central differences."""

    if grad is None:
        def grad(x, _f=eval, _n=dim):
            x = np.asarray(x, dtype=float)
            out = np.empty(_n)
            for i in range(_n):
                e = np.zeros(_n)
                e[i] = FD_STEP_FIRST
                out[i] = (_f(x + e) - _f(x - e)) / (2.0 * FD_STEP_FIRST)
            return out

    if hess is None:
        def hess(x, _g=grad, _n=dim):
            x = np.asarray(x, dtype=float)
            out = np.empty((_n, _n))
            for i in range(_n):
                e = np.zeros(_n)
                e[i] = FD_STEP_SECOND
                out[i] = (np.asarray(_g(x + e)) - np.asarray(_g(x - e))) / (2.0 * FD_STEP_SECOND)
            return 0.5 * (out + out.T)

    box_arr = None
    if box is not None:
        lo = np.atleast_1d(np.asarray(box[0], dtype=float))
        hi = np.atleast_1d(np.asarray(box[1], dtype=float))
        box_arr = (lo, hi)

    return DensityModel(
        dim=dim, eval=eval, grad=grad, hess=hess, kind=kind,
        eval_batch=_batch_from_scalar(eval),
        grad_batch=_batch_from_scalar(grad, vector=True),
        box=box_arr,
    )


def make_mixture(components: list[DensityModel], weights) -> DensityModel:
    """Finite mixture; derivatives are weight-linear in the components."""
    weights = np.asarray(weights, dtype=float)
    if len(components) != weights.size or len(components) == 0:
        raise ValidationError("one weight per mixture component required")
    if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValidationError("mixture weights must be positive and sum to 1")
    dims = {c.dim for c in components}
    if len(dims) != 1:
        raise ValidationError(f"mixture components disagree on dimension: {sorted(dims)}")
    n = dims.pop()
    boxes = [c.box for c in components]
    box = None
    if any(b is not None for b in boxes):
        if any(b is None for b in boxes):
            raise ValidationError("cannot mix box-supported and full-space components")
        lo = np.min([b[0] for b in boxes], axis=0)
        hi = np.max([b[1] for b in boxes], axis=0)
        box = (lo, hi)

    def f(x):
        return float(sum(w * c.eval(x) for w, c in zip(weights, components)))

    def g(x):
        return sum(w * c.grad(x) for w, c in zip(weights, components))

    def h(x):
        return sum(w * c.hess(x) for w, c in zip(weights, components))

    def f_batch(pts):
        return sum(w * c.eval_batch(pts) for w, c in zip(weights, components))

    def g_batch(pts):
        return sum(w * c.grad_batch(pts) for w, c in zip(weights, components))

    return DensityModel(
        dim=n, eval=f, grad=g, hess=h, kind="mixture",
        eval_batch=f_batch, grad_batch=g_batch, box=box,
        mixture=(tuple(components), weights),
    )


def make_product(factors: list[DensityModel]) -> DensityModel:
    """Product density f(x) = prod_k f_k(x_k) over a partition of coordinates."""
    if not factors:
        raise ValidationError("empty product")
    dims = [c.dim for c in factors]
    offsets = np.concatenate([[0], np.cumsum(dims)])
    n = int(offsets[-1])
    boxes = [c.box for c in factors]
    box = None
    if any(b is not None for b in boxes):
        if any(b is None for b in boxes):
            raise ValidationError("cannot mix box-supported and full-space factors")
        box = (np.concatenate([b[0] for b in boxes]), np.concatenate([b[1] for b in boxes]))

    def split(x):
        x = np.asarray(x, dtype=float)
        return [x[offsets[k]: offsets[k + 1]] for k in range(len(factors))]

    def f(x):
        out = 1.0
        for c, xk in zip(factors, split(x)):
            out *= c.eval(xk)
        return out

    def g(x):
        parts = split(x)
        vals = [c.eval(xk) for c, xk in zip(factors, parts)]
        total = np.prod(vals)
        out = np.empty(n)
        for k, (c, xk) in enumerate(zip(factors, parts)):
            out[offsets[k]: offsets[k + 1]] = c.grad(xk) * (total / vals[k])
        return out

    def h(x):
        parts = split(x)
        vals = [c.eval(xk) for c, xk in zip(factors, parts)]
        grads = [c.grad(xk) for c, xk in zip(factors, parts)]
        total = np.prod(vals)
        out = np.empty((n, n))
        for k in range(len(factors)):
            sk = slice(offsets[k], offsets[k + 1])
            out[sk, sk] = factors[k].hess(parts[k]) * (total / vals[k])
            for j in range(k + 1, len(factors)):
                sj = slice(offsets[j], offsets[j + 1])
                blk = np.outer(grads[k], grads[j]) * (total / (vals[k] * vals[j]))
                out[sk, sj] = blk
                out[sj, sk] = blk.T
        return 0.5 * (out + out.T)

    def f_batch(pts):
        pts = np.atleast_2d(pts)
        out = np.ones(pts.shape[0])
        for k, c in enumerate(factors):
            out *= c.eval_batch(pts[:, offsets[k]: offsets[k + 1]])
        return out

    def g_batch(pts):
        pts = np.atleast_2d(pts)
        vals = [c.eval_batch(pts[:, offsets[k]: offsets[k + 1]]) for k, c in enumerate(factors)]
        total = np.prod(np.stack(vals), axis=0)
        out = np.empty((pts.shape[0], n))
        for k, c in enumerate(factors):
            gk = c.grad_batch(pts[:, offsets[k]: offsets[k + 1]])
            out[:, offsets[k]: offsets[k + 1]] = gk * (total / vals[k])[:, None]
        return out

    return DensityModel(
        dim=n, eval=f, grad=g, hess=h, kind="product",
        eval_batch=f_batch, grad_batch=g_batch, box=box,
    )


def pushforward_linear(mu: DensityModel, a: np.ndarray) -> DensityModel:
    """Image of mu under x -> A^{-1} x, via the density x -> det(A) f(Ax)."""
    a = np.asarray(a, dtype=float)
    n = mu.dim
    if a.shape != (n, n):
        raise ValidationError(f"matrix shape {a.shape} incompatible with dimension {n}")
    det = np.linalg.det(a)
    if abs(det) < 1e-12:
        raise ValidationError(f"matrix is numerically singular (det {det:.3e})")
    absdet = abs(det)

    def f(x):
        return absdet * mu.eval(a @ np.asarray(x, dtype=float))

    def g(x):
        return absdet * (a.T @ mu.grad(a @ np.asarray(x, dtype=float)))

    def h(x):
        return absdet * (a.T @ mu.hess(a @ np.asarray(x, dtype=float)) @ a)

    def f_batch(pts):
        return absdet * mu.eval_batch(np.atleast_2d(pts) @ a.T)

    def g_batch(pts):
        return absdet * mu.grad_batch(np.atleast_2d(pts) @ a.T) @ a

    if mu.mixture is not None:
        comps, wts = mu.mixture
        return make_mixture([pushforward_linear(c, a) for c in comps], wts)
    box = None
    gaussian = None
    if mu.gaussian is not None and mu.box is None:
        ai = np.linalg.inv(a)
        gaussian = GaussianSpec(ai @ mu.gaussian.mean, ai @ mu.gaussian.covariance @ ai.T)
    if mu.box is not None:
        # image of a box under A^{-1} is not a box in general; keep the
        # bounding box of the transformed corners
        lo, hi = mu.box
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(n, -1).T
        ai = np.linalg.inv(a)
        img = corners @ ai.T
        box = (img.min(axis=0), img.max(axis=0))

    return DensityModel(
        dim=n, eval=f, grad=g, hess=h, kind=mu.kind,
        eval_batch=f_batch, grad_batch=g_batch, box=box, gaussian=gaussian,
    )


def integrate(g, mu: DensityModel, grid: TensorGrid | None = None) -> tuple[float, float]:
    """(integral of g dmu, error proxy).  g maps (N, n) -> (N,)."""
    if grid is None:
        grid = mu.default_grid()
    if grid.dim != mu.dim:
        raise ValidationError(f"grid dimension {grid.dim} != density dimension {mu.dim}")
    if mu.mixture is not None and mu.box is None:
        comps, wts = mu.mixture
        total, err = 0.0, 0.0
        for w, c in zip(wts, comps):
            v, e = integrate(g, c, grid)
            total += w * v
            err += w * e
        return total, err
    if mu.gaussian is not None and mu.box is None:
        # change variables to the measure's own frame: exact for the Gaussian
        # weight regardless of conditioning
        spec = mu.gaussian
        chol = np.linalg.cholesky(spec.covariance)

        def h(pts):
            return np.asarray(g(np.atleast_2d(pts) @ chol.T + spec.mean), dtype=float)

        return grid.integrate_with_error(h)
    if mu.box is None:
        # Gauss-Hermite rule: weight already contains the standard Gaussian,
        # so integrate g * f / phi against it
        def h(pts):
            phi = np.exp(-0.5 * np.sum(pts**2, axis=1)) / (2.0 * math.pi) ** (mu.dim / 2)
            return np.asarray(g(pts), dtype=float) * mu.eval_batch(pts) / phi
    else:
        def h(pts):
            return np.asarray(g(pts), dtype=float) * mu.eval_batch(pts)
    return grid.integrate_with_error(h)


def measure_nodes(mu: DensityModel, grid: TensorGrid | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights (pts, w) with sum(w * g(pts)) approximating the
    integral of g against mu.  Same change-of-variable conventions as
    ``integrate``."""
    if grid is None:
        grid = mu.default_grid()
    if mu.mixture is not None and mu.box is None:
        comps, wts = mu.mixture
        parts = [measure_nodes(c, grid) for c in comps]
        pts = np.concatenate([p for p, _ in parts])
        w = np.concatenate([wk * wq for wk, (_, wq) in zip(wts, parts)])
        return pts, w
    if mu.gaussian is not None and mu.box is None:
        chol = np.linalg.cholesky(mu.gaussian.covariance)
        return grid.points @ chol.T + mu.gaussian.mean, grid.weights
    if mu.box is None:
        phi = np.exp(-0.5 * np.sum(grid.points**2, axis=1)) / (2.0 * math.pi) ** (mu.dim / 2)
        return grid.points, grid.weights * mu.eval_batch(grid.points) / phi
    return grid.points, grid.weights * mu.eval_batch(grid.points)


@dataclass(frozen=True)
class DiscreteProductSpace:
    """n independent factors on {0,...,k-1} with common base weights."""

    k: int
    n: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.k,):
            raise ValidationError(f"need {self.k} base weights, got shape {w.shape}")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("base weights must be positive and sum to 1")
        if self.k**self.n > ENUMERATION_STATE_CAP:
            raise ValidationError(
                f"{self.k}^{self.n} states exceed the enumeration cap {ENUMERATION_STATE_CAP}"
            )
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_states(self) -> int:
        return self.k**self.n

    def states(self) -> np.ndarray:
        """All states as an (k^n, n) integer array, lexicographic."""
        idx = np.arange(self.n_states)
        out = np.empty((self.n_states, self.n), dtype=np.int64)
        for i in range(self.n - 1, -1, -1):
            out[:, i] = idx % self.k
            idx //= self.k
        return out

    def state_weights(self) -> np.ndarray:
        st = self.states()
        return np.prod(self.weights[st], axis=1)

    def flip(self, states: np.ndarray, i: int, to: int) -> np.ndarray:
        out = states.copy()
        out[:, i] = to
        return out

    def expect(self, values: np.ndarray) -> float:
        return float(np.dot(self.state_weights(), values))
