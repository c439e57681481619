"""Constant-curvature model spaces with global embeddings.

Flat space sits in R^n, the sphere in R^(n+1), hyperbolic space on the upper
hyperboloid sheet in Minkowski R^(n,1) with signature (-,+,...,+).  All maps
are closed-form; batch variants operate on arrays of points, one row each.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from ..errors import ValidationError

ON_MANIFOLD_TOL = 1e-10
SMALL_ANGLE = 1e-8


@dataclass(frozen=True)
class SpaceForm:
    n: int
    kappa: float
    model: str  # flat | sphere | hyperboloid

    def __post_init__(self):
        if self.model == "flat":
            if self.kappa != 0.0 or not (1 <= self.n <= 4):
                raise ValidationError("flat model needs kappa = 0 and n <= 4")
        elif self.model == "sphere":
            if self.kappa <= 0.0 or self.n != 2:
                raise ValidationError("sphere model needs kappa > 0 and n = 2")
        elif self.model == "hyperboloid":
            if self.kappa >= 0.0 or self.n not in (2, 3):
                raise ValidationError("hyperboloid model needs kappa < 0 and n in {2, 3}")
        else:
            raise ValidationError(f"unknown model {self.model!r}")

    @staticmethod
    def flat(n: int) -> "SpaceForm":
        return SpaceForm(n, 0.0, "flat")

    @staticmethod
    def sphere(kappa: float) -> "SpaceForm":
        return SpaceForm(2, kappa, "sphere")

    @staticmethod
    def hyperbolic(n: int, kappa: float) -> "SpaceForm":
        return SpaceForm(n, kappa, "hyperboloid")

    @property
    def ambient_dim(self) -> int:
        return self.n if self.model == "flat" else self.n + 1

    @property
    def radius(self) -> float:
        if self.model == "flat":
            return math.inf
        return 1.0 / math.sqrt(abs(self.kappa))

    @property
    def curvature_scale(self) -> float:
        return math.sqrt(abs(self.kappa))

    # -- ambient bilinear form ------------------------------------------------

    def metric_signs(self) -> np.ndarray:
        s = np.ones(self.ambient_dim)
        if self.model == "hyperboloid":
            s[0] = -1.0
        return s

    def ambient_dot(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.sum(u * v * self.metric_signs(), axis=-1)

    def origin(self) -> np.ndarray:
        if self.model == "flat":
            return np.zeros(self.n)
        x = np.zeros(self.n + 1)
        x[0] = self.radius
        return x

    # -- constraints ----------------------------------------------------------

    def constraint_violation(self, x: np.ndarray) -> np.ndarray:
        if self.model == "flat":
            return np.zeros(np.shape(x)[:-1])
        target = 1.0 / self.kappa
        return np.abs(self.ambient_dot(x, x) - target)

    def check_point(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise ValidationError(f"expected ambient dimension {self.ambient_dim}")
        v = np.max(self.constraint_violation(x)) if x.size else 0.0
        if v > ON_MANIFOLD_TOL * max(1.0, self.radius if self.model != "flat" else 1.0) ** 2:
            raise ValidationError(f"point off the manifold by {v:.3e}")
        if self.model == "hyperboloid" and np.any(x[..., 0] <= 0):
            raise ValidationError("hyperboloid points must lie on the upper sheet")
        return x

    def check_tangent(self, x: np.ndarray, v: np.ndarray):
        v = np.asarray(v, dtype=float)
        if self.model == "flat":
            return v
        err = np.max(np.abs(self.ambient_dot(x, v)))
        if err > 1e-8 * max(1.0, float(np.max(np.abs(v))) * self.radius):
            raise ValidationError(f"vector not tangent, normal component {err:.3e}")
        return v

    def project_points(self, x: np.ndarray) -> np.ndarray:
        """Re-project near-manifold points exactly onto the constraint set."""
        if self.model == "flat":
            return x
        if self.model == "sphere":
            return x * (self.radius / np.linalg.norm(x, axis=-1, keepdims=True))
        spatial = x[..., 1:]
        x0 = np.sqrt(self.radius**2 + np.sum(spatial**2, axis=-1))
        out = x.copy()
        out[..., 0] = x0
        return out

    def project_tangent(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.model == "flat":
            return v
        coef = self.ambient_dot(x, v) * self.kappa  # <x,v>/<x,x>
        return v - coef[..., None] * x

    # -- exponential map, log, distance, transport ---------------------------

    def exp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Batched exponential map; x and v broadcast with rows as points."""
        if self.model == "flat":
            return x + v
        a = self.curvature_scale
        norm = np.sqrt(np.maximum(self.ambient_dot(v, v), 0.0))
        th = a * norm
        small = th < SMALL_ANGLE
        safe = np.where(small, 1.0, th)
        if self.model == "sphere":
            coef_x = np.cos(th)
            coef_v = np.where(small, 1.0 - th**2 / 6.0, np.sin(safe) / safe)
        else:
            coef_x = np.cosh(th)
            coef_v = np.where(small, 1.0 + th**2 / 6.0, np.sinh(safe) / safe)
        out = coef_x[..., None] * x + coef_v[..., None] * v
        return self.project_points(out)

    def distance(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.model == "flat":
            return np.linalg.norm(y - x, axis=-1)
        a = self.curvature_scale
        if self.model == "sphere":
            c = np.clip(self.ambient_dot(x, y) * self.kappa, -1.0, 1.0)
            return np.arccos(c) / a
        c = np.clip(-self.ambient_dot(x, y) * (-self.kappa), 1.0, None)
        return np.arccosh(c) / a

    def log(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Batched inverse exponential; fails near the antipode on the sphere."""
        if self.model == "flat":
            return y - x
        d = self.distance(x, y)
        u = self.project_tangent(x, y)
        norm_u = np.sqrt(np.maximum(self.ambient_dot(u, u), 0.0))
        if self.model == "sphere":
            margin = math.pi / self.curvature_scale - np.max(d)
            if margin < 1e-6 * self.radius:
                raise ValidationError("log map ill-conditioned near the antipode")
        small = norm_u < SMALL_ANGLE * self.radius
        scale = np.where(small, 1.0, d / np.where(small, 1.0, norm_u))
        return scale[..., None] * u

    def transport(self, x: np.ndarray, e: np.ndarray, d: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Parallel transport of w from x to exp_x(d e), e a g-unit tangent.

        Vectorized over leading axes; w may be a stack of vectors sharing x, e.
        """
        if self.model == "flat":
            return w
        a = self.curvature_scale
        th = a * d
        if self.model == "sphere":
            e_y = (-a * np.sin(th))[..., None] * x + np.cos(th)[..., None] * e
        else:
            e_y = (a * np.sinh(th))[..., None] * x + np.cosh(th)[..., None] * e
        comp = self.ambient_dot(w, e)
        return w + comp[..., None] * (e_y - e)

    # -- frames ---------------------------------------------------------------

    def orthonormal_frame(self, x: np.ndarray, first: np.ndarray | None = None) -> np.ndarray:
        """Columns form a g-orthonormal tangent basis at x; `first` seeds e1."""
        dim, n = self.ambient_dim, self.n
        cols = []
        candidates = []
        if first is not None:
            candidates.append(np.asarray(first, dtype=float))
        candidates.extend(np.eye(dim))
        signs = self.metric_signs()
        for cand in candidates:
            if len(cols) == n:
                break
            v = self.project_tangent(x, cand)
            for c in cols:
                v = v - float(np.sum(v * c * signs)) * c
            nrm = float(np.sum(v * v * signs))
            if nrm > 1e-12:
                cols.append(v / math.sqrt(nrm))
        if len(cols) != n:
            raise ValidationError("failed to build a tangent frame")
        return np.stack(cols, axis=1)

    def orthonormalize_frames(self, x: np.ndarray, frames: np.ndarray) -> np.ndarray:
        """Gram-Schmidt on the columns of each frame, batched over paths."""
        signs = self.metric_signs()
        out = frames.copy()
        for j in range(self.n):
            v = self.project_tangent(x, out[..., j]) if self.model != "flat" else out[..., j]
            for k in range(j):
                c = np.sum(v * out[..., k] * signs, axis=-1)
                v = v - c[..., None] * out[..., k]
            nrm = np.sqrt(np.maximum(np.sum(v * v * signs, axis=-1), 1e-300))
            out[..., j] = v / nrm[..., None]
        return out

    def frame_orthonormality_error(self, x: np.ndarray, frames: np.ndarray) -> float:
        signs = self.metric_signs()
        gram = np.einsum("...ij,...ik,i->...jk", frames, frames, signs)
        return float(np.max(np.abs(gram - np.eye(self.n))))


@dataclass(frozen=True)
class ManifoldPoint:
    space: SpaceForm
    coords: np.ndarray

    def __post_init__(self):
        c = self.space.check_point(np.asarray(self.coords, dtype=float)).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)


@dataclass(frozen=True)
class TangentVector:
    space: SpaceForm
    base: np.ndarray
    vec: np.ndarray

    def __post_init__(self):
        b = self.space.check_point(np.asarray(self.base, dtype=float)).copy()
        v = self.space.check_tangent(b, np.asarray(self.vec, dtype=float)).copy()
        b.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "base", b)
        object.__setattr__(self, "vec", v)

    @property
    def norm(self) -> float:
        return math.sqrt(max(float(self.space.ambient_dot(self.vec, self.vec)), 0.0))


def exp_map(x: ManifoldPoint, v: TangentVector) -> ManifoldPoint:
    if not np.allclose(x.coords, v.base, atol=1e-12):
        raise ValidationError("tangent vector based at a different point")
    return ManifoldPoint(x.space, x.space.exp(x.coords, v.vec))


def log_map(x: ManifoldPoint, y: ManifoldPoint) -> TangentVector:
    out = x.space.log(x.coords, y.coords)
    return TangentVector(x.space, x.coords, x.space.project_tangent(x.coords, out))


def geodesic_distance(x: ManifoldPoint, y: ManifoldPoint) -> float:
    return float(x.space.distance(x.coords, y.coords))


def parallel_transport(x: ManifoldPoint, y: ManifoldPoint, w: TangentVector) -> TangentVector:
    space = x.space
    if space.model == "flat":
        return TangentVector(space, y.coords, w.vec)
    u = log_map(x, y)
    d = u.norm
    if d < 1e-14:
        return TangentVector(space, y.coords, w.vec)
    e = u.vec / d
    out = space.transport(x.coords, e, np.asarray(d), w.vec)
    out = space.project_tangent(y.coords, out)
    return TangentVector(space, y.coords, out)
