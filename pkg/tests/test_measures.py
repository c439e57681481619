import math

import numpy as np
import pytest

from idfi.errors import ValidationError
from idfi.linalg import is_psd, psd_leq, logdet_pd, SymMatrix
from idfi.measures import (
    DiscreteProductSpace,
    GaussianSpec,
    integrate,
    make_custom,
    make_gaussian,
    make_mixture,
    make_product,
    pushforward_linear,
)
from idfi.quadrature import gauss_hermite_grid, gauss_legendre_box

import oracles


RNG = np.random.default_rng(2026_08)


def test_sym_matrix_basics():
    m = SymMatrix(np.array([[2.0, 0.5], [0.5, 1.0]]))
    assert m.is_pd()
    assert abs(m.logdet() - math.log(2.0 * 1.0 - 0.25)) < 1e-12
    assert abs(m.trace - 3.0) < 1e-15
    inv = m.inv()
    assert np.allclose(inv.array @ m.array, np.eye(2), atol=1e-12)


def test_psd_order():
    a = np.eye(2)
    b = 2.0 * np.eye(2)
    assert psd_leq(a, b)
    assert not psd_leq(b, a)
    assert is_psd(np.zeros((3, 3)))


def test_logdet_rejects_indefinite():
    from idfi.errors import NumericsError

    with pytest.raises(NumericsError):
        logdet_pd(np.diag([1.0, -1.0]))


def test_hermite_grid_normalized():
    for n in (1, 2, 3):
        g = gauss_hermite_grid(n, m=20)
        assert abs(np.sum(g.weights) - 1.0) < 1e-12
        assert np.all(g.weights > 0)


def test_hermite_moments():
    g = gauss_hermite_grid(1, m=40)
    x4 = g.integrate(lambda p: p[:, 0] ** 4)
    assert abs(x4 - 3.0) < 1e-10


def test_legendre_box():
    g = gauss_legendre_box([0.0, 0.0], [1.0, 2.0], m=12)
    one = g.integrate(lambda p: np.ones(p.shape[0]))
    assert abs(one - 2.0) < 1e-12
    xy = g.integrate(lambda p: p[:, 0] * p[:, 1])
    assert abs(xy - 0.5 * 2.0) < 1e-12


def test_grid_dimension_cap():
    with pytest.raises(ValidationError):
        gauss_hermite_grid(5, m=10)


def test_gaussian_peak_value():
    mu = make_gaussian(GaussianSpec(np.zeros(2), np.eye(2)))
    assert abs(mu.eval(np.zeros(2)) - 1.0 / (2.0 * math.pi)) < 1e-14
    assert np.allclose(mu.grad(np.zeros(2)), 0.0)


def test_gaussian_offdiag_point():
    # product of two 1-d Gaussian factors evaluated independently
    mu = make_gaussian(GaussianSpec(np.zeros(2), np.diag([2.0, 1.0])))
    x = np.array([1.0, 1.0])
    f1 = math.exp(-0.5 * 1.0 / 2.0) / math.sqrt(2.0 * math.pi * 2.0)
    f2 = math.exp(-0.5) / math.sqrt(2.0 * math.pi)
    assert abs(mu.eval(x) - f1 * f2) < 1e-14


def test_gaussian_rejects_indefinite():
    with pytest.raises(ValidationError):
        GaussianSpec(np.zeros(2), np.diag([1.0, -0.5]))


@pytest.mark.parametrize("builder", ["gaussian", "mixture", "product", "custom"])
def test_gradients_match_finite_differences(builder):
    if builder == "gaussian":
        c = RNG.standard_normal((2, 2))
        mu = make_gaussian(GaussianSpec(RNG.standard_normal(2), c @ c.T + np.eye(2)))
    elif builder == "mixture":
        mu = make_mixture(
            [
                make_gaussian(GaussianSpec(np.array([1.0, 0.0]), np.eye(2))),
                make_gaussian(GaussianSpec(np.array([-1.0, 0.5]), 0.5 * np.eye(2))),
            ],
            [0.3, 0.7],
        )
    elif builder == "product":
        mu = make_product(
            [
                make_gaussian(GaussianSpec(np.zeros(1), np.eye(1))),
                make_gaussian(GaussianSpec(np.array([0.2]), np.array([[2.0]]))),
            ]
        )
    else:
        mu = make_custom(
            2,
            eval=lambda x: math.exp(-0.25 * (x[0] ** 4 + x[1] ** 2) - 0.1 * x[0] * x[1]),
            box=([-4.0, -6.0], [4.0, 6.0]),
        )
    h = 1e-4
    for _ in range(20):
        x = RNG.uniform(-1.5, 1.5, size=2)
        g = mu.grad(x)
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd = (mu.eval(x + e) - mu.eval(x - e)) / (2 * h)
            assert abs(g[i] - fd) < 1e-5 * max(1.0, abs(fd))
        hess = mu.hess(x)
        assert np.allclose(hess, hess.T, atol=1e-10)
        for i in range(2):
            e = np.zeros(2)
            e[i] = 1e-3
            fdg = (mu.grad(x + e) - mu.grad(x - e)) / (2e-3)
            assert np.max(np.abs(hess[i] - fdg)) < 2e-4 * max(1.0, np.max(np.abs(fdg)))


def test_normalization_default_grid():
    mu = make_mixture(
        [
            make_gaussian(GaussianSpec(np.array([0.7, -0.3]), np.eye(2))),
            make_gaussian(GaussianSpec(np.array([-0.5, 0.2]), np.diag([0.8, 1.4]))),
        ],
        [0.4, 0.6],
    )
    val, err = integrate(lambda p: np.ones(p.shape[0]), mu)
    assert abs(val - 1.0) < 1e-6


def test_pushforward_identity_and_gaussian():
    mu = make_gaussian(GaussianSpec(np.zeros(2), np.diag([2.0, 0.5])))
    same = pushforward_linear(mu, np.eye(2))
    x = np.array([0.3, -0.8])
    assert abs(same.eval(x) - mu.eval(x)) < 1e-14

    a = np.array([[1.0, 0.4], [0.0, 2.0]])
    pushed = pushforward_linear(mu, a)
    ai = np.linalg.inv(a)
    ref = make_gaussian(GaussianSpec(np.zeros(2), ai @ np.diag([2.0, 0.5]) @ ai.T))
    for _ in range(10):
        x = RNG.standard_normal(2)
        assert abs(pushed.eval(x) - ref.eval(x)) < 1e-10
    val, _ = integrate(lambda p: np.ones(p.shape[0]), pushed)
    assert abs(val - 1.0) < 1e-8


def test_pushforward_rejects_singular():
    mu = make_gaussian(GaussianSpec(np.zeros(2), np.eye(2)))
    with pytest.raises(ValidationError):
        pushforward_linear(mu, np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_integrate_moments():
    mu = make_gaussian(GaussianSpec(np.zeros(2), np.eye(2)))
    v, _ = integrate(lambda p: p[:, 0] ** 2, mu)
    assert abs(v - 1.0) < 1e-8
    mu1 = make_gaussian(GaussianSpec(np.zeros(1), np.eye(1)))
    v4, _ = integrate(lambda p: p[:, 0] ** 4, mu1)
    ref = oracles.quad_1d(lambda t: t**4 * oracles.standard_normal_pdf(t), -12, 12)
    assert abs(v4 - ref) < 1e-8
    assert abs(v4 - 3.0) < 1e-8


def test_discrete_space():
    sp = DiscreteProductSpace(2, 3, np.array([0.5, 0.5]))
    assert sp.n_states == 8
    w = sp.state_weights()
    assert abs(w.sum() - 1.0) < 1e-14
    with pytest.raises(ValidationError):
        DiscreteProductSpace(2, 25, np.array([0.5, 0.5]))
    with pytest.raises(ValidationError):
        DiscreteProductSpace(2, 2, np.array([0.7, 0.2]))
