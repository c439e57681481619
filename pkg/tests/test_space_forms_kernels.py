"""Heat kernels on the model spaces against mass, spectral, and limit oracles."""

import math

import numpy as np
import pytest

import oracles
from idfi.errors import ValidationError
from idfi.space_forms.geometry import SpaceForm
from idfi.space_forms.kernels import heat_kernel, max_radius, radial_support, sphere_area

FLAT2 = SpaceForm(2, 0.0, "flat")
FLAT3 = SpaceForm(3, 0.0, "flat")
S2 = SpaceForm(2, 1.0, "sphere")
S2_TIGHT = SpaceForm(2, 2.0, "sphere")
H2 = SpaceForm(2, -1.0, "hyperboloid")
H2_DEEP = SpaceForm(2, -2.0, "hyperboloid")
H3 = SpaceForm(3, -1.0, "hyperboloid")
H3_DEEP = SpaceForm(3, -2.0, "hyperboloid")

ALL_SPACES = [FLAT2, FLAT3, S2, S2_TIGHT, H2, H2_DEEP, H3, H3_DEEP]


def kernel_mass(space, t):
    top = min(radial_support(space, t), max_radius(space) * (1.0 - 1e-12))
    r = np.linspace(1e-12, top, 6001)
    dens = np.asarray(heat_kernel(space, t, r)) * sphere_area(space, r)
    return oracles.integrate.simpson(dens, x=r)


@pytest.mark.parametrize("space", ALL_SPACES)
@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0])
def test_kernel_mass_is_one(space, t):
    assert abs(kernel_mass(space, t) - 1.0) < 1e-6


def test_flat_kernel_literal():
    r = np.array([0.0, 0.4, 1.3])
    for space in (FLAT2, FLAT3):
        t = 0.7
        want = (2.0 * math.pi * t) ** (-space.n / 2.0) * np.exp(-(r**2) / (2.0 * t))
        assert np.max(np.abs(heat_kernel(space, t, r) - want)) < 1e-15


@pytest.mark.parametrize("ell", [0, 1, 2, 5])
@pytest.mark.parametrize("t", [0.3, 1.0])
def test_sphere_kernel_spectral_decay(ell, t):
    """Legendre moments of the kernel decay with the Laplacian spectrum."""
    theta = np.linspace(1e-9, math.pi - 1e-9, 4001)
    vals = np.asarray(heat_kernel(S2, t, theta))
    got = oracles.legendre_kernel_moment(vals, theta, ell)
    want = math.exp(-ell * (ell + 1) * t / 2.0)
    assert abs(got - want) < 1e-9


def test_h3_kernel_closed_form():
    t = 0.6
    r = np.array([1e-8, 0.3, 1.0, 2.5])
    want = (
        (2.0 * math.pi * t) ** -1.5
        * math.exp(-t / 2.0)
        * (r / np.sinh(r))
        * np.exp(-(r**2) / (2.0 * t))
    )
    assert np.max(np.abs(heat_kernel(H3, t, r) / want - 1.0)) < 1e-12


@pytest.mark.parametrize("model,sign", [("hyperboloid", -1.0), ("sphere", 1.0)])
def test_flat_limit_linear_in_curvature(model, sign):
    """Kernels approach the flat kernel linearly as curvature vanishes."""
    t, r = 0.5, np.array([0.2, 0.8, 1.5])
    n = 2
    flat = np.asarray(heat_kernel(FLAT2, t, r))
    gaps = []
    for eps in (2e-2, 1e-2):
        space = SpaceForm(n, sign * eps, model)
        gaps.append(np.max(np.abs(np.asarray(heat_kernel(space, t, r)) - flat)))
    assert gaps[1] < 2e-3
    assert gaps[0] / gaps[1] == pytest.approx(2.0, rel=0.25)


def test_h2_kernel_quadrature_converged():
    from idfi.space_forms.kernels import _h2_kernel_unit

    for t in (0.05, 0.5, 2.0):
        r = np.linspace(0.0, 5.0, 200)
        a = _h2_kernel_unit(t, r, n_nodes=80)
        b = _h2_kernel_unit(t, r, n_nodes=40)
        assert np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-280)) < 1e-11


def test_curvature_rescale_consistency():
    """A kernel at kappa = -2 is the unit kernel run at rescaled time/length."""
    t, r = 0.7, np.array([0.3, 1.1])
    scale = math.sqrt(2.0)
    got = np.asarray(heat_kernel(H3_DEEP, t, r))
    want = scale**3 * np.asarray(heat_kernel(H3, t * 2.0, r * scale))
    assert np.max(np.abs(got / want - 1.0)) < 1e-12


def test_sphere_area_forms():
    r = np.array([0.5, 1.0])
    assert np.allclose(sphere_area(FLAT2, r), 2.0 * math.pi * r)
    assert np.allclose(sphere_area(FLAT3, r), 4.0 * math.pi * r**2)
    assert np.allclose(sphere_area(S2, r), 2.0 * math.pi * np.sin(r))
    assert np.allclose(sphere_area(H2, r), 2.0 * math.pi * np.sinh(r))
    assert np.allclose(sphere_area(H3, r), 4.0 * math.pi * np.sinh(r) ** 2)


def test_max_radius_and_support():
    assert max_radius(S2) == pytest.approx(math.pi)
    assert max_radius(S2_TIGHT) == pytest.approx(math.pi / math.sqrt(2.0))
    assert math.isinf(max_radius(H3))
    assert radial_support(S2, 5.0) == max_radius(S2)
    assert radial_support(FLAT2, 0.25) == pytest.approx(7.0)


def test_kernel_scalar_and_negative_radius():
    val = heat_kernel(FLAT2, 0.5, 0.3)
    assert isinstance(val, float)
    with pytest.raises(ValidationError):
        heat_kernel(FLAT2, -0.1, 0.3)
