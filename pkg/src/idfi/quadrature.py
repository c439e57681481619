"""Tensor-product quadrature on R^n and on boxes.

Gauss-Hermite rules integrate against the standard Gaussian weight per axis
(nodes pre-scaled by sqrt(2), weights normalized to sum to 1), so integrating
f against N(0, Id) is a plain weighted sum.  Gauss-Legendre rules integrate
against Lebesgue measure on a box.  Both expose a cheap error proxy obtained
by re-evaluating with two fewer nodes per axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from numpy.polynomial import hermite_e, legendre

from .config import DEFAULT_POINTS_PER_AXIS, MAX_TENSOR_GRID_DIM
from .errors import ValidationError


@lru_cache(maxsize=64)
def _hermite_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    # probabilists' Hermite: weight e^{-x^2/2}, so weights need 1/sqrt(2 pi)
    x, w = hermite_e.hermegauss(m)
    return x, w / math.sqrt(2.0 * math.pi)


@lru_cache(maxsize=64)
def _legendre_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    return legendre.leggauss(m)


def _tensor(nodes_1d: list[np.ndarray], weights_1d: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    grids = np.meshgrid(*nodes_1d, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    w = weights_1d[0]
    for wi in weights_1d[1:]:
        w = np.multiply.outer(w, wi)
    return pts, w.ravel()


@dataclass(frozen=True)
class TensorGrid:
    """Flattened tensor-product rule: points (N, n) and weights (N,)."""

    points: np.ndarray
    weights: np.ndarray
    coarse_points: np.ndarray
    coarse_weights: np.ndarray

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def integrate(self, f) -> float:
        """Integral of f; f takes an (N, n) array and returns (N,)."""
        return float(np.dot(self.weights, np.asarray(f(self.points), dtype=float)))

    def integrate_with_error(self, f) -> tuple[float, float]:
        fine = float(np.dot(self.weights, np.asarray(f(self.points), dtype=float)))
        coarse = float(np.dot(self.coarse_weights, np.asarray(f(self.coarse_points), dtype=float)))
        return fine, abs(fine - coarse)

    def integrate_vector(self, f) -> np.ndarray:
        """Integral of a vector/matrix-valued f: f((N, n)) -> (N, ...)."""
        vals = np.asarray(f(self.points), dtype=float)
        return np.tensordot(self.weights, vals, axes=(0, 0))


def _check_dim(n: int, m: int):
    if n < 1:
        raise ValidationError(f"dimension must be positive, got {n}")
    if n > MAX_TENSOR_GRID_DIM:
        raise ValidationError(
            f"tensor grid in dimension {n} exceeds the cap of {MAX_TENSOR_GRID_DIM}; "
            "use a sparse or Monte Carlo route instead"
        )
    if m < 4:
        raise ValidationError(f"need at least 4 nodes per axis, got {m}")


def gauss_hermite_grid(n: int, m: int = DEFAULT_POINTS_PER_AXIS) -> TensorGrid:
    """Rule for integrals against N(0, Id_n)."""
    _check_dim(n, m)
    x, w = _hermite_nodes(m)
    xc, wc = _hermite_nodes(m - 2)
    pts, ws = _tensor([x] * n, [w] * n)
    ptsc, wsc = _tensor([xc] * n, [wc] * n)
    return TensorGrid(pts, ws, ptsc, wsc)


def gauss_legendre_box(lo, hi, m: int = DEFAULT_POINTS_PER_AXIS) -> TensorGrid:
    """Rule for Lebesgue integrals over the box [lo, hi]."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape:
        raise ValidationError("box corners must have matching shapes")
    if np.any(hi <= lo):
        raise ValidationError("box must have positive volume")
    n = lo.size
    _check_dim(n, m)

    def scaled(mm: int):
        x, w = _legendre_nodes(mm)
        nodes, weights = [], []
        for d in range(n):
            half = 0.5 * (hi[d] - lo[d])
            mid = 0.5 * (hi[d] + lo[d])
            nodes.append(mid + half * x)
            weights.append(half * w)
        return _tensor(nodes, weights)

    pts, ws = scaled(m)
    ptsc, wsc = scaled(m - 2)
    return TensorGrid(pts, ws, ptsc, wsc)


def gauss_hermite_1d(m: int = DEFAULT_POINTS_PER_AXIS) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and N(0,1)-weights for a single axis."""
    return _hermite_nodes(m)
