"""Entropy tensorization on enumerable product spaces.

The one-factor entropy-vs-energy relation is calibrated once as a concave
envelope (a piecewise-linear upper bound), then transferred to products of n
factors two ways: through per-coordinate energies, and through their average.
Everything on the product side is exact enumeration; the envelope is the only
approximation, and it errs on the dominating side by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable
import math

import numpy as np

from .config import DISCRETE_DERIVATIVE_FACTOR
from .errors import ValidationError
from .measures import DiscreteProductSpace


@dataclass(frozen=True)
class ConcavePhi:
    """Piecewise-linear concave function through (0,0), extrapolated past the
    last breakpoint with its final slope."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.breakpoints, dtype=float)
        y = np.asarray(self.values, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or x.size < 2:
            raise ValidationError("need matching 1-d breakpoint and value arrays, length >= 2")
        if x[0] != 0.0 or y[0] != 0.0:
            raise ValidationError("the envelope must pass through the origin")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("breakpoints must be strictly increasing")
        slopes = np.diff(y) / np.diff(x)
        if np.any(np.diff(slopes) > 1e-12):
            raise ValidationError("slopes must be non-increasing (concavity)")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "breakpoints", x)
        object.__setattr__(self, "values", y)

    @property
    def max_calibrated(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def final_slope(self) -> float:
        return float((self.values[-1] - self.values[-2]) /
                     (self.breakpoints[-1] - self.breakpoints[-2]))

    def __call__(self, e):
        e = np.asarray(e, dtype=float)
        if np.any(e < -1e-15):
            raise ValidationError("energies must be nonnegative")
        e = np.clip(e, 0.0, None)
        inside = np.interp(e, self.breakpoints, self.values)
        beyond = self.values[-1] + self.final_slope * (e - self.breakpoints[-1])
        out = np.where(e <= self.breakpoints[-1], inside, beyond)
        return float(out) if out.ndim == 0 else out

    def covers(self, e: float) -> bool:
        return 0.0 <= e <= self.max_calibrated


def _two_point_curve(p: float, w0: float, w1: float, s: np.ndarray):
    """Normalized (energy, entropy) pairs for f = (1, exp(s)) on a two-point
    space, both divided by the p-th moment."""
    es = np.exp(s)
    c2 = DISCRETE_DERIVATIVE_FACTOR**2
    if p == 1.0:
        fp = es
        energy = c2 * (1.0 - es) * (-s)
        ent_raw = w1 * es * s
    else:
        fp = es**p
        energy = c2 * (1.0 - es) * (1.0 - es ** (p - 1.0))
        ent_raw = w1 * fp * (p * s)
    mean_p = w0 + w1 * fp
    ent = ent_raw - mean_p * np.log(mean_p)
    return energy / mean_p, ent / mean_p


_PHI_CACHE: dict = {}


def calibrate_phi(p: float, base: DiscreteProductSpace, resolution: int = 2000,
                  s_range: float = 40.0, n_sweep: int = 2_000_000) -> ConcavePhi:
    """Concave envelope of the one-factor entropy/energy cloud.

    Sweeps the ratio of the two function values on a log grid, takes the
    upper concave hull of the resulting curve, then thins the hull to at
    most ``resolution`` supporting lines.  The thinned envelope is the
    lower envelope of a subset of hull edges, so it dominates every swept
    point and stays concave.
    """
    if base.k != 2 or base.n != 1:
        raise ValidationError("calibration runs on a single two-point factor")
    if p < 1.0:
        raise ValidationError("need p >= 1")
    w0, w1 = float(base.weights[0]), float(base.weights[1])
    key = (p, w0, w1, resolution, s_range, n_sweep)
    if key in _PHI_CACHE:
        return _PHI_CACHE[key]

    s = np.linspace(-s_range, s_range, n_sweep)
    s = s[s != 0.0]
    e, h = _two_point_curve(p, w0, w1, s)
    e = np.concatenate([[0.0], e])
    h = np.concatenate([[0.0], h])
    if e.size == 0:
        raise ValidationError("empty calibration sweep")

    order = np.argsort(e, kind="stable")
    e, h = e[order], h[order]
    # collapse duplicate abscissae keeping the larger ordinate
    keep_mask = np.empty(e.size, dtype=bool)
    keep_mask[0] = True
    np.greater(np.diff(e), 1e-300, out=keep_mask[1:])
    grp = np.cumsum(keep_mask) - 1
    e_u = e[keep_mask]
    h_u = np.full(e_u.size, -np.inf)
    np.maximum.at(h_u, grp, h)

    hull_x, hull_y = _upper_concave_hull(e_u, h_u)
    lines = _hull_edge_lines(hull_x, hull_y)
    if len(lines) > resolution:
        idx = np.unique(np.linspace(0, len(lines) - 1, resolution).round().astype(int))
        lines = [lines[i] for i in idx]
    # force the origin line so the envelope vanishes at zero
    m0 = lines[0][0]
    lines[0] = (m0, 0.0)
    phi = _envelope_from_lines(lines)
    _PHI_CACHE[key] = phi
    return phi


def _upper_concave_hull(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Andrew's monotone chain, upper side, x strictly increasing."""
    keep: list[int] = []
    for i in range(x.size):
        while len(keep) >= 2:
            i1, i2 = keep[-2], keep[-1]
            # pop if the middle point is below the chord (cross product)
            if (x[i2] - x[i1]) * (y[i] - y[i1]) - (y[i2] - y[i1]) * (x[i] - x[i1]) >= 0:
                keep.pop()
            else:
                break
        keep.append(i)
    ks = np.asarray(keep)
    return x[ks], y[ks]


def _hull_edge_lines(hx: np.ndarray, hy: np.ndarray) -> list:
    slopes = np.diff(hy) / np.diff(hx)
    intercepts = hy[:-1] - slopes * hx[:-1]
    return list(zip(slopes.tolist(), intercepts.tolist()))


def _envelope_from_lines(lines) -> ConcavePhi:
    # lines come ordered by decreasing slope along the hull; drop any that
    # never attain the lower envelope (equal-slope duplicates)
    ms = np.asarray([l[0] for l in lines])
    bs = np.asarray([l[1] for l in lines])
    sel = np.concatenate([[True], np.diff(ms) < -1e-15])
    ms, bs = ms[sel], bs[sel]
    xs = [0.0]
    ys = [bs[0]]
    for k in range(ms.size - 1):
        xk = (bs[k + 1] - bs[k]) / (ms[k] - ms[k + 1])
        xs.append(xk)
        ys.append(ms[k] * xk + bs[k])
    # numerical guard: enforce strict increase
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    good = np.concatenate([[True], np.diff(xs) > 1e-300])
    return ConcavePhi(xs[good], ys[good])


# ---------------------------------------------------------------------------
# product-space evaluation


def _flip_strides(space: DiscreteProductSpace) -> np.ndarray:
    # lexicographic state index: coordinate i has stride 2^(n-1-i)
    return 2 ** np.arange(space.n - 1, -1, -1)


def coordinate_energy(fv: np.ndarray, space: DiscreteProductSpace, i: int, p: float,
                      c_conv: float = DISCRETE_DERIVATIVE_FACTOR) -> float:
    """E[d_i f * d_i f^(p-1)] with the p=1 endpoint read as d_i log f."""
    if space.k != 2:
        raise ValidationError("coordinate energies need two-point factors")
    stride = int(_flip_strides(space)[i])
    idx = np.arange(space.n_states)
    flipped = idx ^ stride
    df = c_conv * (fv - fv[flipped])
    gv = np.log(fv) if p == 1.0 else fv ** (p - 1.0)
    dg = c_conv * (gv - gv[flipped])
    return float(np.dot(space.state_weights(), df * dg))


@dataclass(frozen=True)
class TensorizedResult:
    lhs: float
    rhs_intrinsic: float
    rhs_mean: float
    energies: np.ndarray
    extrapolated: bool


def tensorized_bound(f: Callable[[np.ndarray], np.ndarray], phi: ConcavePhi, p: float,
                     space: DiscreteProductSpace) -> TensorizedResult:
    """Product-space entropy vs the per-coordinate and averaged envelopes."""
    states = space.states()
    fv = np.asarray(f(states), dtype=float)
    if np.any(fv <= 0.0):
        raise ValidationError("the function must be strictly positive")
    w = space.state_weights()
    fp = fv if p == 1.0 else fv**p
    mean_p = float(np.dot(w, fp))
    lhs = float(np.dot(w, fp * np.log(fp))) - mean_p * math.log(mean_p)

    energies = np.asarray([
        coordinate_energy(fv, space, i, p) for i in range(space.n)
    ]) / mean_p
    rhs_intrinsic = mean_p * float(np.sum(phi(energies)))
    rhs_mean = space.n * mean_p * float(phi(float(np.mean(energies))))
    extrapolated = bool(np.any(energies > phi.max_calibrated))
    return TensorizedResult(lhs, rhs_intrinsic, rhs_mean, energies, extrapolated)


def entropy_subadditivity(f: Callable[[np.ndarray], np.ndarray],
                          space: DiscreteProductSpace) -> tuple[float, float]:
    """(product entropy, sum of averaged conditional one-coordinate entropies)."""
    if space.k != 2:
        raise ValidationError("implemented for two-point factors")
    states = space.states()
    fv = np.asarray(f(states), dtype=float)
    if np.any(fv <= 0.0):
        raise ValidationError("the function must be strictly positive")
    w = space.state_weights()
    ef = float(np.dot(w, fv))
    lhs = float(np.dot(w, fv * np.log(fv))) - ef * math.log(ef)

    idx = np.arange(space.n_states)
    total = 0.0
    for i in range(space.n):
        stride = int(_flip_strides(space)[i])
        at0 = idx[(idx & stride) == 0]
        at1 = at0 ^ stride
        w0c, w1c = space.weights[0], space.weights[1]
        f0, f1 = fv[at0], fv[at1]
        mean_c = w0c * f0 + w1c * f1
        ent_c = w0c * f0 * np.log(f0) + w1c * f1 * np.log(f1) - mean_c * np.log(mean_c)
        # weight of the complementary configuration
        w_rest = w[at0] / w0c
        total += float(np.dot(w_rest, ent_c))
    return lhs, total


# ---------------------------------------------------------------------------
# general two-functional tensorization


@dataclass(frozen=True)
class FunctionalPair:
    """One coordinate's pair of functionals.

    full(fv, space, i) evaluates on the whole product; slice_(vals2, w2)
    evaluates on a single two-point factor with its base weights.  name is
    used in diagnostics.
    """

    full: Callable[[np.ndarray, DiscreteProductSpace, int], float]
    slice_: Callable[[np.ndarray, np.ndarray], float]
    name: str = ""


def check_disintegration(pair: FunctionalPair, fv: np.ndarray,
                         space: DiscreteProductSpace, i: int, tol: float = 1e-10) -> float:
    """Average of slice evaluations vs the full evaluation; returns the gap."""
    idx = np.arange(space.n_states)
    stride = int(_flip_strides(space)[i])
    at0 = idx[(idx & stride) == 0]
    at1 = at0 ^ stride
    w_rest = space.state_weights()[at0] / space.weights[0]
    acc = 0.0
    for j0, j1, wr in zip(at0, at1, w_rest):
        acc += wr * pair.slice_(np.array([fv[j0], fv[j1]]), space.weights)
    gap = abs(acc - pair.full(fv, space, i))
    if gap > tol:
        raise ValidationError(f"functional {pair.name or i} fails to disintegrate: gap {gap:.3e}")
    return gap


def check_one_coordinate_assumption(q_pair: FunctionalPair, m_pair: FunctionalPair,
                                    phi: ConcavePhi, space: DiscreteProductSpace,
                                    fv: np.ndarray, i: int, tol: float = 1e-10) -> bool:
    """Entropy bound on every conditional slice of coordinate i."""
    idx = np.arange(space.n_states)
    stride = int(_flip_strides(space)[i])
    at0 = idx[(idx & stride) == 0]
    at1 = at0 ^ stride
    w2 = space.weights
    for j0, j1 in zip(at0, at1):
        vals = np.array([fv[j0], fv[j1]])
        mean = float(np.dot(w2, vals))
        ent = float(np.dot(w2, vals * np.log(vals))) - mean * math.log(mean)
        qv = q_pair.slice_(vals, w2)
        mv = m_pair.slice_(vals, w2)
        if ent > qv + mean * phi((mv - qv) / mean) + tol:
            return False
    return True


def general_tensorize(f: Callable[[np.ndarray], np.ndarray],
                      q_pairs: list, m_pairs: list, phi: ConcavePhi,
                      space: DiscreteProductSpace,
                      check_assumption: bool = True) -> tuple[float, float]:
    """Entropy vs sum of Q functionals plus envelope terms in (M - Q)."""
    if len(q_pairs) != space.n or len(m_pairs) != space.n:
        raise ValidationError("need one functional pair per coordinate")
    states = space.states()
    fv = np.asarray(f(states), dtype=float)
    if np.any(fv <= 0.0):
        raise ValidationError("the function must be strictly positive")
    w = space.state_weights()
    ef = float(np.dot(w, fv))
    lhs = float(np.dot(w, fv * np.log(fv))) - ef * math.log(ef)

    rhs = 0.0
    for i in range(space.n):
        check_disintegration(q_pairs[i], fv, space, i)
        check_disintegration(m_pairs[i], fv, space, i)
        if check_assumption and not check_one_coordinate_assumption(
                q_pairs[i], m_pairs[i], phi, space, fv, i):
            raise ValidationError(f"one-coordinate assumption fails for coordinate {i}")
        qv = q_pairs[i].full(fv, space, i)
        mv = m_pairs[i].full(fv, space, i)
        rhs += qv + ef * phi((mv - qv) / ef)
    return lhs, rhs
