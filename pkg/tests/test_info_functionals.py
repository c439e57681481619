import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from idfi.info_functionals import (
    dirichlet_form_coordinate,
    entropy_functional,
    fisher_matrix,
    fisher_scalar,
    hadamard_jensen_chain,
    lp_norm,
    relative_entropy,
    weighted_second_moment_matrix,
)
from idfi.measures import (
    DiscreteProductSpace,
    GaussianSpec,
    make_gaussian,
    make_mixture,
    make_product,
)
from idfi.quadrature import gauss_hermite_grid

import oracles


RNG = np.random.default_rng(7_11_2026)


def test_standard_gaussian_entropy_vs_lebesgue():
    for n in (1, 2, 3):
        mu = make_gaussian(GaussianSpec(np.zeros(n), np.eye(n)))
        h = relative_entropy(mu)
        assert h.estimator == "analytic"
        assert abs(h.value - (-0.5 * n * math.log(2 * math.pi * math.e))) < 1e-12


def test_entropy_identical_measures():
    mu = make_gaussian(GaussianSpec(np.array([0.3]), np.array([[1.7]])))
    h = relative_entropy(mu, mu)
    assert abs(h.value) < 1e-10


def test_entropy_quadrature_matches_analytic():
    cov = np.diag([4.0, 1.0])
    spec = GaussianSpec(np.zeros(2), cov)
    mu = make_gaussian(spec)
    analytic = relative_entropy(mu).value
    assert abs(analytic - oracles.gaussian_entropy_vs_lebesgue(cov)) < 1e-12
    # force the quadrature route through a mixture with one component
    mix = make_mixture([mu], [1.0])
    quad = relative_entropy(mix)
    assert quad.estimator == "quadrature"
    assert abs(quad.value - analytic) < 1e-6


def test_entropy_between_gaussians_is_kl():
    m0, c0 = np.array([0.4, -0.1]), np.diag([1.5, 0.7])
    m1, c1 = np.zeros(2), np.eye(2)
    mu = make_gaussian(GaussianSpec(m0, c0))
    nu = make_gaussian(GaussianSpec(m1, c1))
    val = relative_entropy(mu, nu).value
    assert abs(val - oracles.gaussian_kl(m0, c0, m1, c1)) < 1e-8


def test_fisher_gaussian_closed_form():
    c = RNG.standard_normal((3, 3))
    cov = c @ c.T + np.eye(3)
    mu = make_gaussian(GaussianSpec(RNG.standard_normal(3), cov))
    fm = fisher_matrix(mu)
    assert np.allclose(fm.array, oracles.gaussian_fisher_vs_lebesgue(cov), atol=1e-10)


def test_fisher_quadrature_matches_closed_form():
    cov = np.array([[1.2, 0.3], [0.3, 0.9]])
    mu = make_gaussian(GaussianSpec(np.zeros(2), cov))
    mix = make_mixture([mu], [1.0])  # forces quadrature
    fm = fisher_matrix(mix)
    assert np.max(np.abs(fm.array - np.linalg.inv(cov))) < 1e-6
    assert abs(fm.trace - fisher_scalar(mix)) < 1e-8


def test_fisher_same_measure_zero():
    mu = make_gaussian(GaussianSpec(np.zeros(2), np.diag([2.0, 3.0])))
    fm = fisher_matrix(mu, mu)
    assert np.max(np.abs(fm.array)) < 1e-10


def test_fisher_product_block_structure():
    # first factor non-Gaussian-width, second factor standard normal
    part = make_product(
        [
            make_gaussian(GaussianSpec(np.zeros(1), np.array([[0.5]]))),
            make_gaussian(GaussianSpec(np.zeros(1), np.eye(1))),
        ]
    )
    fm = fisher_matrix(part)
    assert abs(fm.array[0, 0] - 2.0) < 1e-6
    assert abs(fm.array[1, 1] - 1.0) < 1e-6
    assert abs(fm.array[0, 1]) < 1e-8


def test_lsi_gaussians_and_mixtures():
    # entropy gap vs half the Fisher trace gap, strict except at translates
    for _ in range(5):
        c = RNG.standard_normal((2, 2))
        cov = c @ c.T + 0.5 * np.eye(2)
        mu = make_gaussian(GaussianSpec(RNG.standard_normal(2), cov))
        lhs = relative_entropy(mu).value - (-0.5 * 2 * math.log(2 * math.pi * math.e))
        rhs = 0.5 * (fisher_scalar(mu) - 2)
        assert lhs <= rhs + 1e-9
    shifted = make_gaussian(GaussianSpec(np.array([1.3, -0.4]), np.eye(2)))
    lhs = relative_entropy(shifted).value - (-math.log(2 * math.pi * math.e))
    rhs = 0.5 * (fisher_scalar(shifted) - 2)
    assert abs(lhs - rhs) < 1e-9


def test_entropy_functional_constants_and_two_point():
    sp = DiscreteProductSpace(2, 1, np.array([0.5, 0.5]))
    const = entropy_functional(lambda s: np.full(s.shape[0], 3.7), sp)
    assert abs(const.value) < 1e-12
    half = entropy_functional(lambda s: np.where(s[:, 0] == 0, 2.0, 0.0), sp)
    assert abs(half.value - math.log(2.0)) < 1e-12
    ref = oracles.discrete_entropy_functional(
        lambda st: 2.0 if st[0] == 0 else 0.0, 2, 1, [np.array([0.5, 0.5])], 1.0
    )
    assert abs(half.value - ref) < 1e-12


def test_entropy_functional_continuous_constant():
    mu = make_gaussian(GaussianSpec(np.zeros(2), np.eye(2)))
    e = entropy_functional(lambda p: np.ones(p.shape[0]), mu)
    assert abs(e.value) < 1e-10


@given(st.integers(min_value=2, max_value=5), st.integers(min_value=0, max_value=10**6))
@settings(max_examples=30, deadline=None)
def test_hadamard_jensen_chain_random(n, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n))
    info = g @ g.T + 0.1 * np.eye(n)
    left, mid, right = hadamard_jensen_chain(info)
    assert left <= mid + 1e-10
    assert mid <= right + 1e-10


def test_lp_norm_cases():
    assert abs(lp_norm(lambda p: np.ones(p.shape[0]), 3.0, dim=2) - 1.0) < 1e-12
    assert abs(lp_norm(lambda p: p[:, 0], 2.0, dim=1) - 1.0) < 1e-10
    # exp(x^2/8) in L2(gamma_1): integral of e^{x^2/4} d gamma = sqrt(2)
    val = lp_norm(lambda p: np.exp(p[:, 0] ** 2 / 8.0), 2.0, dim=1, grid=gauss_hermite_grid(1, m=80))
    ref = oracles.quad_1d(lambda t: math.exp(t * t / 4.0) * oracles.standard_normal_pdf(t), -14, 14)
    assert abs(val - math.sqrt(ref)) < 1e-6
    assert abs(ref - math.sqrt(2.0)) < 1e-9


def test_second_moment_matrix():
    g = gauss_hermite_grid(2, m=30)
    m = weighted_second_moment_matrix(lambda p: np.ones(p.shape[0]), g)
    assert np.allclose(m.array, np.eye(2), atol=1e-10)
    g1 = gauss_hermite_grid(1, m=30)
    m1 = weighted_second_moment_matrix(lambda p: p[:, 0], g1)
    assert abs(m1.array[0, 0] - 3.0) < 1e-10


def test_dirichlet_form_coordinate():
    sp = DiscreteProductSpace(2, 2, np.array([0.5, 0.5]))

    def const(s):
        return np.ones(s.shape[0])

    def first_only(s):
        return s[:, 0].astype(float)

    def parity(s):
        return np.where((s[:, 0] + s[:, 1]) % 2 == 0, 1.0, -1.0)

    for i in range(2):
        assert abs(dirichlet_form_coordinate(const, const, i, sp)) < 1e-15
    assert abs(dirichlet_form_coordinate(first_only, first_only, 1, sp)) < 1e-15
    e0 = dirichlet_form_coordinate(parity, parity, 0, sp)
    e1 = dirichlet_form_coordinate(parity, parity, 1, sp)
    assert abs(e0 - e1) < 1e-15
    # flipping parity changes it by 2, derivative = 0.5 * (+-2) = +-1
    assert abs(e0 - 1.0) < 1e-15
