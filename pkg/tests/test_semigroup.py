"""Semigroup quadrature and boundary tensors against closed-form oracles."""

import math

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

import oracles
from idfi.errors import NumericsError, ValidationError
from idfi.space_forms.geometry import SpaceForm
from idfi.space_forms.kernels import heat_kernel, max_radius, radial_support, sphere_area
from idfi.space_forms.semigroup import (
    RadialFunction,
    constant_profile,
    entropy_direct,
    gaussian_bump,
    heat_profile,
    invert_heat_hessian,
    semigroup_apply,
    semigroup_derivatives,
    v_and_m_matrices,
)

FLAT2 = SpaceForm(2, 0.0, "flat")
FLAT3 = SpaceForm(3, 0.0, "flat")
S2 = SpaceForm(2, 1.0, "sphere")
H2 = SpaceForm(2, -1.0, "hyperboloid")
H3 = SpaceForm(3, -1.0, "hyperboloid")

ALL_SPACES = [FLAT2, FLAT3, S2, H2, H3]
CURVED = [S2, H2, H3]


def offset_point(space, rho):
    x = space.origin()
    return space.exp(x, rho * space.orthonormal_frame(x)[:, 0])


def test_radial_function_validation():
    with pytest.raises(ValidationError):
        RadialFunction(np.zeros(2), lambda r: -np.ones_like(r),
                       lambda r: np.zeros_like(r), lambda r: np.zeros_like(r))
    with pytest.raises(ValidationError):
        RadialFunction(np.zeros(2), lambda r: np.exp(r),
                       lambda r: np.exp(r), lambda r: np.exp(r))
    with pytest.raises(ValidationError):
        gaussian_bump(np.zeros(2), -1.0)


def test_gaussian_bump_derivative_consistency():
    f = gaussian_bump(np.zeros(3), 0.7)
    r = np.linspace(0.0, 3.0, 31)
    h = 1e-6
    d_fd = (f.value(r + h) - f.value(r)) / h
    assert np.max(np.abs(d_fd - f.deriv(r + h / 2))) < 1e-5
    dd_fd = (f.deriv(r + h) - f.deriv(r)) / h
    assert np.max(np.abs(dd_fd - f.second(r + h / 2))) < 1e-5


@pytest.mark.parametrize("space", ALL_SPACES)
def test_constant_profile_is_fixed_point(space):
    f = constant_profile(space.origin(), 2.5)
    x = offset_point(space, 0.4)
    assert semigroup_apply(space, f, 0.6, x) == pytest.approx(2.5, abs=1e-10)
    der = semigroup_derivatives(space, f, 0.6, x)
    assert np.max(np.abs(der.grad)) < 1e-7
    assert np.max(np.abs(der.hess)) < 1e-5
    assert entropy_direct(space, f, 0.6, x) == pytest.approx(0.0, abs=1e-10)


def test_flat_gaussian_convolution_oracle():
    w, t, off = 0.8, 0.45, 0.6
    f = gaussian_bump(np.zeros(3), w)
    x = offset_point(FLAT3, off)
    want_v, want_g, want_h = oracles.smoothed_gaussian_bump(w, off, t, 3)
    assert semigroup_apply(FLAT3, f, t, x) == pytest.approx(want_v, abs=1e-7)
    der = semigroup_derivatives(FLAT3, f, t, x)
    # frame column 0 points from x toward the center, so flip the axis
    flip = np.diag([-1.0] + [1.0] * 2)
    assert np.max(np.abs(flip @ der.grad - want_g)) < 1e-7
    assert np.max(np.abs(flip @ der.hess @ flip - want_h)) < 1e-6


@pytest.mark.parametrize("space", ALL_SPACES)
def test_semigroup_property(space):
    """Two-stage smoothing agrees with one-stage within 1e-5."""
    x = space.origin()
    c = space.exp(x, 0.4 * space.orthonormal_frame(x)[:, 0])
    f = gaussian_bump(c, 0.7)
    s, t = 0.3, 0.5
    top = min(radial_support(space, s) + radial_support(space, 2.0), max_radius(space))
    grid = np.linspace(0.0, top, 400)
    spl = CubicSpline(grid, heat_profile(space, f, s, grid), bc_type=((1, 0.0), "not-a-knot"))
    d1, d2 = spl.derivative(), spl.derivative(2)
    half = RadialFunction(
        center=f.center,
        value=lambda r: spl(np.minimum(r, top)),
        deriv=lambda r: d1(np.minimum(r, top)),
        second=lambda r: d2(np.minimum(r, top)),
    )
    direct = semigroup_apply(space, f, s + t, x)
    staged = semigroup_apply(space, half, t, x)
    assert abs(staged - direct) < 1e-5


def test_boundary_matrices_flat_closed_form():
    w, t, off = 0.8, 0.45, 0.6
    f = gaussian_bump(np.zeros(3), w)
    x = offset_point(FLAT3, off)
    bt = v_and_m_matrices(FLAT3, f, x, t)
    v0, v_t, m0, m_t, c_t, j_t = oracles.flat_boundary_matrices(w, off, t, 3)
    assert np.max(np.abs(bt.v0 - v0)) < 1e-6
    assert np.max(np.abs(bt.v_T - v_t)) < 1e-6
    assert np.max(np.abs(bt.m0 - m0)) < 1e-6
    assert np.max(np.abs(bt.m_T - m_t)) < 1e-6
    assert bt.c_T == pytest.approx(c_t, abs=1e-6)
    # the frame radial axis may point either way; j_t is quadratic in it
    assert np.max(np.abs(bt.j_T - j_t)) < 1e-6


@pytest.mark.parametrize("space", ALL_SPACES)
def test_boundary_matrices_trivial_function(space):
    f = constant_profile(space.origin())
    bt = v_and_m_matrices(space, f, offset_point(space, 0.3), 0.5)
    for mat in (bt.v0, bt.v_T, bt.m0, bt.m_T, bt.j_T):
        assert np.max(np.abs(mat)) < 1e-5
    assert abs(bt.c_T) < 1e-5


@pytest.mark.parametrize("space", CURVED)
def test_boundary_matrices_trace_identity(space):
    """tr m_T = tr v_T - c_T links the two endpoint averages to the Laplacian."""
    x = space.origin()
    c = space.exp(x, 0.35 * space.orthonormal_frame(x)[:, 0])
    f = gaussian_bump(c, 0.8)
    bt = v_and_m_matrices(space, f, x, 0.4)
    assert np.trace(bt.m_T) == pytest.approx(np.trace(bt.v_T) - bt.c_T, abs=2e-6)


@pytest.mark.parametrize("space", CURVED)
def test_log_hessian_from_quadrature_matches_profile_second_derivative(space):
    """m0 along the radial axis agrees with a direct second difference."""
    x = space.origin()
    c = space.exp(x, 0.5 * space.orthonormal_frame(x)[:, 0])
    f = gaussian_bump(c, 0.8)
    t = 0.4
    bt = v_and_m_matrices(space, f, x, t)
    rho0 = float(space.distance(c, x))
    h = 1e-3
    rr = np.array([rho0 - 2 * h, rho0 - h, rho0, rho0 + h, rho0 + 2 * h])
    lp = np.log(heat_profile(space, f, t, rr))
    second = (-lp[4] + 16 * lp[3] - 30 * lp[2] + 16 * lp[1] - lp[0]) / (12 * h**2)
    assert bt.m0[0, 0] == pytest.approx(-second, abs=1e-5)


def test_invert_heat_hessian_flat_identity():
    h = np.array([[0.3, 0.1], [0.1, -0.2]])
    out = invert_heat_hessian(FLAT2, h, float(np.trace(h)), 0.7)
    assert np.array_equal(out, h)


def test_invert_heat_hessian_exponent_guard():
    with pytest.raises(NumericsError):
        invert_heat_hessian(H3, np.eye(3), 0.0, 11.0)


def test_entropy_direct_flat_matches_kl():
    w, t, off = 0.8, 0.5, 0.6
    f = gaussian_bump(np.zeros(3), w)
    got = entropy_direct(FLAT3, f, t, offset_point(FLAT3, off))
    assert got == pytest.approx(oracles.gaussian_posterior_kl(w, off, t, 3), abs=1e-10)


@pytest.mark.parametrize("space", CURVED)
def test_entropy_direct_matches_dense_radial_quadrature(space):
    """Centered case reduces to a 1-d integral checked against Simpson."""
    x = space.origin()
    f = gaussian_bump(x, 0.8)
    t = 0.4
    got = entropy_direct(space, f, t, x)
    top = min(radial_support(space, t), max_radius(space) * (1.0 - 1e-12))
    r = np.linspace(1e-10, top, 8001)
    want = oracles.radial_entropy_direct(
        np.asarray(heat_kernel(space, t, r)),
        sphere_area(space, r),
        np.asarray(f.value(r)),
        r,
    )
    assert got == pytest.approx(want, abs=1e-8)


def test_entropy_nonnegative_on_curved_battery():
    for space in CURVED:
        x = space.origin()
        c = space.exp(x, 0.3 * space.orthonormal_frame(x)[:, 0])
        for w in (0.5, 1.2):
            assert entropy_direct(space, gaussian_bump(c, w), 0.5, x) > -1e-12
