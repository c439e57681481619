"""Path ensembles on model spaces: Brownian motion, entropic drift, commutation.

Geodesic Euler steps with frame transport give Brownian paths whose endpoint
law can be tested against the exact kernel; adding the gradient of the
log-smoothed field gives the entropic interpolation whose kinetic energy
estimates relative entropy; transporting endpoint Hessians back along the
paths probes the curvature-weighted commutation of Hessian and semigroup.

Randomness is counter-based: path i of a run seeded with s consumes its own
Philox stream keyed by (s, i), so results are bitwise reproducible for any
chunking of the path loop, and reductions always run in path-index order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline
from scipy.stats import chi2

from idfi.errors import NumericsError, ValidationError
from idfi.space_forms.geometry import SpaceForm
from idfi.space_forms.kernels import heat_kernel, max_radius, radial_support, sphere_area
from idfi.space_forms.semigroup import (
    WANG_EXPONENT_LIMIT,
    RadialFunction,
    heat_profile,
    semigroup_derivatives,
    toward_unit,
)

CHUNK_PATHS = 2048
FRAME_FIX_EVERY = 100
# drifted runs stop this many steps short of the horizon; the kernel at the
# remaining gap is too singular for the step size to resolve
TAIL_STEPS = 10


@dataclass(frozen=True)
class PathEnsemble:
    """Endpoint data of one simulation run plus a few stored trajectories.

    endpoints has one ambient row per path; frames carries the parallel
    transport of the initial frame along each path (columns are the basis
    vectors).  stored_paths keeps the full trajectories of stored_indices
    for export and plotting.  max_frame_drift is the worst orthonormality
    error seen between re-orthonormalizations (every 100 steps); action is
    the per-path time integral of the squared drift when one was applied.
    """

    space: SpaceForm
    h: float
    n_paths: int
    seed: int
    times: np.ndarray
    endpoints: np.ndarray
    frames: np.ndarray
    stored_indices: tuple[int, ...]
    stored_paths: np.ndarray
    end_time: float
    max_constraint_violation: float
    max_frame_drift: float
    action: np.ndarray | None = None
    final_speed_sq: np.ndarray | None = None

    def to_csv(self, path: str):
        """Write the stored trajectories as rows (path_index, t, coordinates)."""
        dim = self.space.ambient_dim
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["path_index", "t"] + [f"x{k}" for k in range(dim)])
            for row, idx in enumerate(self.stored_indices):
                for k, t in enumerate(self.times):
                    writer.writerow(
                        [idx, f"{t:.12g}"]
                        + [f"{c:.17g}" for c in self.stored_paths[row, k]]
                    )


def _path_normals(seed: int, start: int, count: int, steps: int, n: int) -> np.ndarray:
    """Stack of per-path normal blocks, one keyed Philox stream per path."""
    out = np.empty((count, steps, n))
    for j in range(count):
        gen = np.random.Generator(np.random.Philox(key=(seed << 64) + start + j))
        out[j] = gen.standard_normal((steps, n))
    return out


def _check_step(t_final: float, h: float, n_paths: int, seed: int):
    if t_final <= 0:
        raise ValidationError("horizon must be positive")
    if h <= 0 or h > 1e-2 * t_final * (1.0 + 1e-12):
        raise ValidationError("step size must satisfy 0 < h <= T/100")
    if n_paths < 1:
        raise ValidationError("need at least one path")
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValidationError("seed must be a nonnegative integer")


def _simulate(
    space: SpaceForm,
    x0: np.ndarray,
    h_eff: float,
    steps: int,
    n_paths: int,
    seed: int,
    drift_tables,
    drift_center: np.ndarray | None,
    rho_cap: float,
    init_frame: np.ndarray | None,
    store_paths: int,
) -> PathEnsemble:
    n, dim = space.n, space.ambient_dim
    frame0 = init_frame if init_frame is not None else space.orthonormal_frame(x0)
    if space.frame_orthonormality_error(x0, frame0) > 1e-8:
        raise ValidationError("initial frame is not orthonormal at x0")
    sqrt_h = math.sqrt(h_eff)
    n_store = min(store_paths, n_paths)

    endpoints = np.empty((n_paths, dim))
    frames_out = np.empty((n_paths, dim, n))
    stored = np.zeros((n_store, steps + 1, dim))
    actions = np.zeros(n_paths) if drift_tables is not None else None
    final_sq = np.zeros(n_paths) if drift_tables is not None else None
    max_cv = 0.0
    max_drift = 0.0

    for start in range(0, n_paths, CHUNK_PATHS):
        m = min(CHUNK_PATHS, n_paths - start)
        normals = _path_normals(seed, start, m, steps, n)
        x = np.broadcast_to(x0, (m, dim)).copy()
        fr = np.broadcast_to(frame0, (m, dim, n)).copy()
        act = np.zeros(m) if drift_tables is not None else None
        if start < n_store:
            stored[start : min(n_store, start + m), 0] = x0
        for k in range(steps):
            xi = normals[:, k, :]
            v = sqrt_h * np.einsum("pij,pj->pi", fr, xi)
            if drift_tables is not None:
                rho = space.distance(drift_center, x)
                slope = drift_tables[k](np.clip(rho, 0.0, rho_cap))
                away, deg = toward_unit(space, x, np.broadcast_to(drift_center, x.shape))
                slope = np.where(deg, 0.0, slope)
                v = v - (h_eff * slope)[:, None] * away
                act += slope**2 * h_eff
                if k == steps - 1:
                    final_sq[start : start + m] = slope**2
            d = np.sqrt(np.maximum(space.ambient_dot(v, v), 0.0))
            e = v / np.where(d > 0, d, 1.0)[:, None]
            fr_t = space.transport(
                x[:, None, :], e[:, None, :], d[:, None], fr.transpose(0, 2, 1)
            )
            x = space.exp(x, v)
            fr = space.project_tangent(x[:, None, :], fr_t).transpose(0, 2, 1)
            if start < n_store:
                stored[start : min(n_store, start + m), k + 1] = x[: n_store - start]
            if (k + 1) % FRAME_FIX_EVERY == 0 or k == steps - 1:
                max_drift = max(max_drift, space.frame_orthonormality_error(x, fr))
                fr = space.orthonormalize_frames(x, fr)
                max_cv = max(max_cv, float(np.max(space.constraint_violation(x))))
        endpoints[start : start + m] = x
        frames_out[start : start + m] = fr
        if drift_tables is not None:
            actions[start : start + m] = act

    return PathEnsemble(
        space=space,
        h=h_eff,
        n_paths=n_paths,
        seed=int(seed),
        times=np.arange(steps + 1) * h_eff,
        endpoints=endpoints,
        frames=frames_out,
        stored_indices=tuple(range(n_store)),
        stored_paths=stored,
        end_time=steps * h_eff,
        max_constraint_violation=max_cv,
        max_frame_drift=max_drift,
        action=actions,
        final_speed_sq=final_sq,
    )


def simulate_brownian(
    space: SpaceForm,
    x0: np.ndarray,
    horizon: float,
    h: float,
    n_paths: int,
    seed: int,
    init_frame: np.ndarray | None = None,
    store_paths: int = 4,
) -> PathEnsemble:
    """Geodesic Euler Brownian motion (generator half the Laplacian)."""
    _check_step(horizon, h, n_paths, seed)
    x0 = np.asarray(x0, dtype=float)
    space.check_point(x0)
    steps = max(1, int(round(horizon / h)))
    return _simulate(
        space, x0, horizon / steps, steps, n_paths, seed,
        None, None, 0.0, init_frame, store_paths,
    )


def _drift_tables(
    space: SpaceForm,
    f: RadialFunction,
    horizon: float,
    h_eff: float,
    steps_run: int,
    rho0: float,
    n_rho: int,
):
    """Per-step derivative splines of rho -> log P_(horizon - t) f."""
    cap = rho0 + 1.1 * radial_support(space, horizon) + 1.0
    cap = min(cap, max_radius(space) * (1.0 - 1e-9))
    grid = np.linspace(0.0, cap, n_rho)
    tables = []
    for k in range(steps_run):
        remaining = horizon - k * h_eff
        prof = heat_profile(space, f, remaining, grid)
        if np.min(prof) <= 0:
            raise NumericsError("smoothed field underflowed on the drift grid")
        tables.append(CubicSpline(grid, np.log(prof)).derivative())
    return tables, cap


def simulate_follmer(
    space: SpaceForm,
    f: RadialFunction,
    x0: np.ndarray,
    horizon: float,
    h: float,
    n_paths: int,
    seed: int,
    store_paths: int = 4,
    n_rho: int = 256,
) -> PathEnsemble:
    """Brownian paths tilted by the drift grad log P_(horizon - t) f.

    The drift is radial about the field center, so each step needs one
    derivative-of-log-profile spline, built once up front.  The run stops
    TAIL_STEPS short of the horizon, where the drift scale is still
    resolved by the step size; `action` accumulates the squared drift
    integral and `final_speed_sq` the last integrand for tail budgeting.
    """
    _check_step(horizon, h, n_paths, seed)
    x0 = np.asarray(x0, dtype=float)
    space.check_point(x0)
    space.check_point(f.center)
    steps = max(1, int(round(horizon / h)))
    h_eff = horizon / steps
    steps_run = steps - TAIL_STEPS
    if steps_run < 1:
        raise ValidationError("horizon too short for the drifted run")
    rho0 = float(space.distance(f.center, x0))
    tables, cap = _drift_tables(space, f, horizon, h_eff, steps_run, rho0, n_rho)
    return _simulate(
        space, x0, h_eff, steps_run, n_paths, seed,
        tables, f.center, cap, None, store_paths,
    )


def lehec_entropy_estimate(
    space: SpaceForm,
    f: RadialFunction,
    x0: np.ndarray,
    horizon: float,
    h: float,
    n_paths: int,
    seed: int,
) -> tuple[float, float]:
    """Relative entropy of the f-weighted endpoint law by drift energy.

    Returns (estimate, error budget): half the mean path action, and the
    standard error of that mean plus half the unresolved tail integral
    estimated from the final drift magnitude.
    """
    ens = simulate_follmer(space, f, x0, horizon, h, n_paths, seed, store_paths=0)
    half = 0.5 * ens.action
    estimate = float(np.mean(half))
    se = float(np.std(half, ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else float("inf")
    tail = 0.5 * float(np.mean(ens.final_speed_sq)) * (horizon - ens.end_time)
    return estimate, se + tail


def _cot_like(space: SpaceForm, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """sigma'(rho)/sigma(rho) and a mask where sigma is too small to use."""
    if space.model == "flat":
        small = rho < 1e-6
        return 1.0 / np.where(small, 1.0, rho), small
    a = space.curvature_scale
    if space.model == "sphere":
        s = np.sin(a * rho)
        small = np.abs(s) < 1e-6
        return a * np.cos(a * rho) / np.where(small, 1.0, s), small
    s = np.sinh(a * rho)
    small = np.abs(s) < 1e-6
    return a * np.cosh(a * rho) / np.where(small, 1.0, s), small


@dataclass(frozen=True)
class WangResidual:
    """Gap in the curvature-weighted exchange of Hessian and smoothing.

    residual is the largest entry of hess P_T f minus the path-transported
    endpoint average of hess f rescaled by e^(-n kappa T) minus the trace
    correction (1 - e^(-n kappa T))/n times the Laplacian; std_error is the
    Monte Carlo standard error of that entry average after rescaling.
    """

    residual: float
    std_error: float
    smooth_hessian: np.ndarray
    endpoint_mean: np.ndarray
    laplace_smooth: float
    n_paths: int


def wang_residual(
    space: SpaceForm,
    f: RadialFunction,
    horizon: float,
    x: np.ndarray,
    h: float | None = None,
    n_paths: int = 50_000,
    seed: int = 0,
) -> WangResidual:
    """Check hess P_T f against the transported endpoint average of hess f."""
    x = np.asarray(x, dtype=float)
    space.check_point(x)
    nkt = space.n * space.kappa * horizon
    if abs(nkt) > WANG_EXPONENT_LIMIT:
        raise NumericsError(
            f"commutation factor out of range, |n kappa T| = {abs(nkt):.2f}"
        )
    der = semigroup_derivatives(space, f, horizon, x)
    step = h if h is not None else 1e-2 * horizon
    ens = simulate_brownian(
        space, x, horizon, step, n_paths, seed, init_frame=der.frame, store_paths=0
    )

    y, fr = ens.endpoints, ens.frames
    rho = space.distance(f.center, y)
    toward_c, deg = toward_unit(space, y, np.broadcast_to(f.center, y.shape))
    # frame components of the radial direction; sign-free because it only
    # enters through products a_i a_j
    comp = space.ambient_dot(fr.transpose(0, 2, 1), toward_c[:, None, :])
    dphi = np.asarray(f.deriv(rho))
    ddphi = np.asarray(f.second(rho))
    ct, small = _cot_like(space, rho)
    iso = deg | small
    n = space.n
    eye = np.eye(n)
    aa = comp[:, :, None] * comp[:, None, :]
    tangential = dphi * ct
    hess_f = np.where(
        iso[:, None, None],
        ddphi[:, None, None] * eye,
        ddphi[:, None, None] * aa + tangential[:, None, None] * (eye - aa),
    )
    mean_h = np.mean(hess_f, axis=0)
    se_h = np.std(hess_f, axis=0, ddof=1) / math.sqrt(n_paths) if n_paths > 1 else (
        np.full((n, n), np.inf)
    )
    factor = math.exp(-nkt)
    laplace = float(np.trace(der.hess))
    gap = der.hess - factor * mean_h - ((1.0 - factor) / n) * laplace * eye
    return WangResidual(
        residual=float(np.max(np.abs(gap))),
        std_error=float(factor * np.max(se_h)),
        smooth_hessian=der.hess,
        endpoint_mean=mean_h,
        laplace_smooth=laplace,
        n_paths=n_paths,
    )


def radial_cdf(space: SpaceForm, t: float, n_grid: int = 4001) -> tuple[np.ndarray, np.ndarray]:
    """Distribution function of the distance from the start under the kernel."""
    if t <= 0:
        raise ValidationError("time must be positive")
    top = min(radial_support(space, t), max_radius(space) * (1.0 - 1e-12))
    r = np.linspace(0.0, top, n_grid)
    density = np.asarray(heat_kernel(space, t, r)) * sphere_area(space, r)
    cdf = cumulative_simpson(density, x=r, initial=0.0)
    mass = float(cdf[-1])
    if abs(mass - 1.0) > 1e-4:
        raise NumericsError(f"kernel mass off by {abs(mass - 1.0):.3e} on the grid")
    return r, cdf / mass


@dataclass(frozen=True)
class EndpointTest:
    statistic: float
    p_value: float
    dof: int
    counts: np.ndarray
    expected: float


def endpoint_chi_square(
    space: SpaceForm,
    endpoints: np.ndarray,
    x0: np.ndarray,
    t: float,
    n_bins: int = 20,
) -> EndpointTest:
    """Chi-square fit of endpoint distances to the exact kernel radial law.

    Bins are equal-probability, cut at quantiles of the radial distribution,
    so the statistic is chi-square with n_bins - 1 degrees of freedom under
    the exact law.
    """
    if n_bins < 2:
        raise ValidationError("need at least two bins")
    x0 = np.asarray(x0, dtype=float)
    rho = np.asarray(space.distance(x0, np.asarray(endpoints, dtype=float)))
    n_pts = rho.size
    if n_pts < 10 * n_bins:
        raise ValidationError("too few endpoints for the bin count")
    r, cdf = radial_cdf(space, t)
    edges = np.interp(np.linspace(0.0, 1.0, n_bins + 1)[1:-1], cdf, r)
    counts = np.bincount(np.searchsorted(edges, rho), minlength=n_bins).astype(float)
    expected = n_pts / n_bins
    stat = float(np.sum((counts - expected) ** 2) / expected)
    dof = n_bins - 1
    return EndpointTest(
        statistic=stat,
        p_value=float(chi2.sf(stat, dof)),
        dof=dof,
        counts=counts,
        expected=expected,
    )
