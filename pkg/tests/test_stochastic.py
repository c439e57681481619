"""Path ensembles: endpoint laws, drift energies, commutation residuals.

Monte Carlo assertions here run small path counts with pinned seeds; the
tolerances below carry at least a 3x margin over the observed statistic at
those seeds.  The large-count versions live in the acceptance battery.
"""

import numpy as np
import pytest

import oracles
from idfi.errors import NumericsError, ValidationError
from idfi.space_forms.geometry import SpaceForm
from idfi.space_forms.semigroup import constant_profile, entropy_direct, gaussian_bump
from idfi.space_forms.stochastic import (
    endpoint_chi_square,
    lehec_entropy_estimate,
    radial_cdf,
    simulate_brownian,
    simulate_follmer,
    wang_residual,
)

FLAT2 = SpaceForm(2, 0.0, "flat")
FLAT3 = SpaceForm(3, 0.0, "flat")
S2 = SpaceForm(2, 1.0, "sphere")
H2 = SpaceForm(2, -1.0, "hyperboloid")
H3 = SpaceForm(3, -1.0, "hyperboloid")


def test_step_validation():
    x0 = FLAT2.origin()
    with pytest.raises(ValidationError):
        simulate_brownian(FLAT2, x0, 0.5, 0.1, 10, 0)  # h too coarse
    with pytest.raises(ValidationError):
        simulate_brownian(FLAT2, x0, -1.0, 1e-3, 10, 0)
    with pytest.raises(ValidationError):
        simulate_brownian(FLAT2, x0, 0.5, 1e-3, 0, 0)
    with pytest.raises(ValidationError):
        simulate_brownian(FLAT2, x0, 0.5, 1e-3, 10, -3)


def test_flat_endpoints_match_gaussian_moments():
    """Flat endpoints are exactly N(x0, T I) in law; 4 SE window."""
    x0 = np.array([0.3, -0.1])
    t_end = 0.5
    n_paths = 4000
    ens = simulate_brownian(FLAT2, x0, t_end, 5e-3, n_paths, seed=11)
    se_mean = np.sqrt(t_end / n_paths)
    assert np.max(np.abs(np.mean(ens.endpoints, axis=0) - x0)) < 4 * se_mean
    cov = np.cov(ens.endpoints.T)
    se_cov = t_end * np.sqrt(2.0 / n_paths)
    assert np.max(np.abs(cov - t_end * np.eye(2))) < 4 * se_cov


def test_bitwise_reproducibility_across_chunking():
    """Path i sees the same stream no matter how many paths accompany it."""
    x0 = FLAT2.origin()
    a = simulate_brownian(FLAT2, x0, 0.3, 3e-3, 50, seed=7)
    b = simulate_brownian(FLAT2, x0, 0.3, 3e-3, 2100, seed=7)
    assert np.array_equal(a.endpoints, b.endpoints[:50])
    c = simulate_brownian(FLAT2, x0, 0.3, 3e-3, 50, seed=7)
    assert np.array_equal(a.endpoints, c.endpoints)
    assert np.array_equal(a.frames, c.frames)


@pytest.mark.parametrize("space,t_end", [(S2, 0.4), (H2, 0.4), (H3, 0.4)])
def test_curved_endpoint_chi_square_small(space, t_end):
    ens = simulate_brownian(space, space.origin(), t_end, 4e-3, 20000, seed=3)
    assert ens.max_constraint_violation < 1e-8
    assert ens.max_frame_drift * 10.0 < 1e-8  # drift budget per 1e3 steps
    test = endpoint_chi_square(space, ens.endpoints, space.origin(), t_end)
    assert test.p_value > 0.01
    assert test.counts.sum() == 20000


def test_ensemble_invariants_and_csv(tmp_path):
    ens = simulate_brownian(H2, H2.origin(), 0.3, 3e-3, 40, seed=5, store_paths=3)
    assert ens.stored_paths.shape == (3, 101, 3)
    assert np.max(H2.constraint_violation(ens.stored_paths.reshape(-1, 3))) < 1e-8
    assert H2.frame_orthonormality_error(ens.endpoints, ens.frames) < 1e-8
    out = tmp_path / "paths.csv"
    ens.to_csv(str(out))
    lines = out.read_text().splitlines()
    assert lines[0] == "path_index,t,x0,x1,x2"
    assert len(lines) == 1 + 3 * 101


def test_follmer_constant_function_reduces_to_brownian():
    """Zero drift: same seeds give literally the same endpoints."""
    f = constant_profile(FLAT2.origin(), 2.0)
    t_end, h = 0.5, 4e-3
    fol = simulate_follmer(FLAT2, f, FLAT2.origin(), t_end, h, 60, seed=9)
    steps_run = round(fol.end_time / fol.h)
    bro = simulate_brownian(FLAT2, FLAT2.origin(), fol.end_time, fol.h, 60, seed=9)
    assert np.max(np.abs(fol.action)) == 0.0
    assert round(bro.end_time / bro.h) == steps_run
    assert np.max(np.abs(fol.endpoints - bro.endpoints)) < 1e-12


def test_follmer_endpoints_tilted_toward_the_bump():
    f = gaussian_bump(np.array([1.0, 0.0]), 0.3)
    ens = simulate_follmer(FLAT2, f, FLAT2.origin(), 0.6, 3e-3, 2000, seed=13)
    mean = np.mean(ens.endpoints, axis=0)
    assert mean[0] > 0.3  # pulled toward the bump center
    assert abs(mean[1]) < 0.05
    assert np.all(ens.action >= 0.0)


def test_lehec_estimate_flat_gaussian():
    w, t_end, off = 0.8, 0.5, 0.6
    f = gaussian_bump(np.zeros(3), w)
    x0 = np.array([off, 0.0, 0.0])
    est, budget = lehec_entropy_estimate(FLAT3, f, x0, t_end, 1e-3, 3000, seed=5)
    want = oracles.gaussian_posterior_kl(w, off, t_end, 3)
    assert abs(est - want) < 3.0 * budget
    assert budget < 0.05


def test_lehec_estimate_h3_vs_direct():
    f = gaussian_bump(H3.origin(), 0.8)
    x0 = H3.exp(H3.origin(), 0.4 * H3.orthonormal_frame(H3.origin())[:, 0])
    t_end = 0.5
    est, budget = lehec_entropy_estimate(H3, f, x0, t_end, 1e-3, 3000, seed=6)
    want = entropy_direct(H3, f, t_end, x0)
    assert abs(est - want) < 3.0 * budget


def test_wang_residual_flat_noise_level():
    f = gaussian_bump(np.zeros(3), 8.0)
    res = wang_residual(FLAT3, f, 0.2, np.array([0.3, 0.0, 0.0]),
                        h=2e-3, n_paths=20000, seed=2)
    assert res.residual < 5.0 * (res.std_error + 1e-7)
    assert res.std_error < 1e-3


def test_wang_residual_constant_function():
    f = constant_profile(FLAT2.origin(), 1.0)
    res = wang_residual(FLAT2, f, 0.3, FLAT2.origin(), h=3e-3, n_paths=200, seed=1)
    assert res.residual < 1e-8


def test_wang_residual_exponent_guard():
    f = gaussian_bump(H3.origin(), 0.8)
    with pytest.raises(NumericsError):
        wang_residual(H3, f, 11.0, H3.origin(), n_paths=10)


def test_radial_cdf_monotone_normalized():
    for space in (FLAT2, S2, H3):
        r, cdf = radial_cdf(space, 0.5)
        assert cdf[0] == 0.0
        assert cdf[-1] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(cdf) >= -1e-15)


def test_chi_square_validation():
    ens = simulate_brownian(FLAT2, FLAT2.origin(), 0.3, 3e-3, 50, seed=1)
    with pytest.raises(ValidationError):
        endpoint_chi_square(FLAT2, ens.endpoints, FLAT2.origin(), 0.3)  # too few


def test_follmer_on_sphere_runs_clean():
    f = gaussian_bump(S2.origin(), 0.5)
    x0 = S2.exp(S2.origin(), 0.5 * S2.orthonormal_frame(S2.origin())[:, 1])
    ens = simulate_follmer(S2, f, x0, 0.4, 4e-3, 300, seed=21)
    assert ens.max_constraint_violation < 1e-8
    assert np.all(np.isfinite(ens.action))
    assert ens.end_time < 0.4
