"""Geometry of the model spaces: maps, distances, transport, frames."""

import numpy as np
import pytest

import oracles
from idfi.errors import ValidationError
from idfi.space_forms.geometry import SpaceForm

FLAT2 = SpaceForm(2, 0.0, "flat")
FLAT3 = SpaceForm(3, 0.0, "flat")
S2 = SpaceForm(2, 1.0, "sphere")
S2_TIGHT = SpaceForm(2, 2.0, "sphere")
H2 = SpaceForm(2, -1.0, "hyperboloid")
H3 = SpaceForm(3, -1.0, "hyperboloid")
H3_DEEP = SpaceForm(3, -2.0, "hyperboloid")

ALL_SPACES = [FLAT2, FLAT3, S2, S2_TIGHT, H2, H3, H3_DEEP]
CURVED = [S2, S2_TIGHT, H2, H3, H3_DEEP]


def random_point(space, rng, spread=0.8):
    v = spread * rng.standard_normal(space.n)
    frame = space.orthonormal_frame(space.origin())
    return space.exp(space.origin(), frame @ v)


@pytest.mark.parametrize("space", ALL_SPACES)
def test_exp_log_round_trip(space):
    rng = np.random.default_rng(1)
    x = random_point(space, rng)
    frame = space.orthonormal_frame(x)
    for _ in range(10):
        v = frame @ (0.6 * rng.standard_normal(space.n))
        y = space.exp(x, v)
        assert space.constraint_violation(y) < 1e-10
        back = space.log(x, y)
        assert np.max(np.abs(back - v)) < 1e-10


@pytest.mark.parametrize("space", ALL_SPACES)
def test_distance_matches_tangent_norm(space):
    rng = np.random.default_rng(2)
    x = random_point(space, rng)
    frame = space.orthonormal_frame(x)
    coef = 0.7 * rng.standard_normal(space.n)
    y = space.exp(x, frame @ coef)
    assert space.distance(x, y) == pytest.approx(np.linalg.norm(coef), abs=1e-12)
    assert space.distance(y, x) == pytest.approx(np.linalg.norm(coef), abs=1e-12)


@pytest.mark.parametrize("space", ALL_SPACES)
def test_triangle_inequality(space):
    rng = np.random.default_rng(3)
    for _ in range(20):
        x, y, z = (random_point(space, rng) for _ in range(3))
        assert space.distance(x, z) <= space.distance(x, y) + space.distance(y, z) + 1e-12


@pytest.mark.parametrize("space", ALL_SPACES)
def test_transport_is_isometric(space):
    rng = np.random.default_rng(4)
    x = random_point(space, rng)
    frame = space.orthonormal_frame(x)
    w1 = frame @ rng.standard_normal(space.n)
    w2 = frame @ rng.standard_normal(space.n)
    e = frame @ np.eye(space.n)[0]
    d = np.array(0.9)
    t1 = space.transport(x, e, d, w1)
    t2 = space.transport(x, e, d, w2)
    y = space.exp(x, d * e)
    assert abs(space.ambient_dot(t1, t2) - space.ambient_dot(w1, w2)) < 1e-12
    assert space.constraint_violation(y) < 1e-12
    # transported vectors are tangent at the arrival point
    assert np.max(np.abs(space.project_tangent(y, t1) - t1)) < 1e-10


@pytest.mark.parametrize("space", ALL_SPACES)
def test_frames_are_orthonormal(space):
    rng = np.random.default_rng(5)
    x = random_point(space, rng)
    frame = space.orthonormal_frame(x)
    assert space.frame_orthonormality_error(x, frame) < 1e-12
    stack = np.stack([frame, frame])
    pts = np.stack([x, x])
    fixed = space.orthonormalize_frames(pts, stack)
    assert space.frame_orthonormality_error(pts, fixed) < 1e-12


@pytest.mark.parametrize("space", ALL_SPACES)
def test_project_tangent_idempotent(space):
    rng = np.random.default_rng(6)
    x = random_point(space, rng)
    w = rng.standard_normal(space.ambient_dim)
    p1 = space.project_tangent(x, w)
    p2 = space.project_tangent(x, p1)
    assert np.max(np.abs(p2 - p1)) < 1e-12


def test_sphere_log_rejects_antipode():
    x = S2.origin()
    y = -x
    with pytest.raises(ValidationError):
        S2.log(x, np.stack([x + 0.0, y]))


def octant_vertices():
    return (
        np.array([0.0, 0.0, 1.0]),
        np.array([1.0, 0.0, 0.0]),
        np.array([0.0, 1.0, 0.0]),
    )


def transport_along_triangle(space, a, b, c, w):
    for p, q in ((a, b), (b, c), (c, a)):
        d = space.distance(p, q)
        e = space.log(p, q) / d
        w = space.transport(p, e, np.array(d), w)
    return w


def test_sphere_octant_holonomy():
    """Transport around the octant rotates tangents by the enclosed area."""
    a, b, c = octant_vertices()
    frame = S2.orthonormal_frame(a)
    w = frame[:, 0]
    back = transport_along_triangle(S2, a, b, c, w)
    area = np.pi / 2.0
    rotated = np.cos(area) * frame[:, 0] + np.sin(area) * frame[:, 1]
    flipped = np.cos(area) * frame[:, 0] - np.sin(area) * frame[:, 1]
    err = min(np.max(np.abs(back - rotated)), np.max(np.abs(back - flipped)))
    assert err < 1e-6


def test_sphere_random_triangle_holonomy():
    """Rotation angle equals the spherical excess of the triangle."""
    rng = np.random.default_rng(9)
    for _ in range(5):
        pts = rng.standard_normal((3, 3))
        pts[2] = pts[0] + 0.6 * pts[1] + 0.3 * pts[2]  # keep the triangle modest
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        a, b, c = pts
        excess = oracles.spherical_triangle_excess(a, b, c)
        frame = S2.orthonormal_frame(a)
        back = transport_along_triangle(S2, a, b, c, frame[:, 0])
        cos_rot = float(S2.ambient_dot(back, frame[:, 0]))
        assert abs(cos_rot - np.cos(excess)) < 1e-6


@pytest.mark.parametrize("space", CURVED)
def test_exp_projects_back_to_surface(space):
    # the walk is pulled back toward the origin each step so the ambient
    # coordinates stay O(1); far out on a hyperboloid the constraint check
    # itself loses precision to exponentially large components
    rng = np.random.default_rng(10)
    x = space.origin()
    for _ in range(50):
        frame = space.orthonormal_frame(x)
        step = 0.3 * rng.standard_normal(space.n)
        x = space.exp(x, frame @ step)
        assert space.constraint_violation(x) < 1e-10
        if space.distance(space.origin(), x) > 1.5:
            x = space.exp(x, 0.8 * space.log(x, space.origin()))
