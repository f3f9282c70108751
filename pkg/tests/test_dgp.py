"""Simulation engine: AR streams, loadings, structured noise, CAPM prep."""

import numpy as np
import pytest
from scipy.linalg import solve_discrete_lyapunov

from tenfact import series_unfold
from tenfact.dgp import (
    COMMON_NOISE_AR,
    FACTOR_AR,
    IDIO_NOISE_AR,
    DgpConfig,
    ar_stationary_autocovariances,
    capm_betas,
    capm_residuals,
    generate_loadings,
    generate_noise,
    simulate_setting,
    standardized_ar,
)


def lyapunov_moments(coeffs):
    """Independent oracle: stationary variance and lag-1 autocorrelation."""
    p = len(coeffs)
    companion = np.zeros((p, p))
    companion[0] = coeffs
    companion[1:, :-1] = np.eye(p - 1)
    q = np.zeros((p, p))
    q[0, 0] = 1.0
    sigma = solve_discrete_lyapunov(companion, q)
    return sigma[0, 0], sigma[0, 1] / sigma[0, 0]


# ---------------------------------------------------------------- AR streams


def test_ar_autocovariances_match_lyapunov_oracle():
    for coeffs in (FACTOR_AR, COMMON_NOISE_AR, IDIO_NOISE_AR):
        gamma = ar_stationary_autocovariances(coeffs)
        var, rho1 = lyapunov_moments(coeffs)
        assert gamma[0] == pytest.approx(var, rel=1e-10)
        assert gamma[1] / gamma[0] == pytest.approx(rho1, rel=1e-10)


def test_standardized_ar_zero_coeffs_is_white_noise():
    rng = np.random.default_rng(100)
    x = standardized_ar(5000, (0.0, 0.0, 0.0, 0.0, 0.0), rng)
    assert x.shape == (5000,)
    assert x.var() == pytest.approx(1.0, abs=0.06)
    assert abs(np.corrcoef(x[:-1], x[1:])[0, 1]) < 0.05


@pytest.mark.parametrize("coeffs", [FACTOR_AR, COMMON_NOISE_AR, IDIO_NOISE_AR])
def test_standardized_ar_long_run_moments(coeffs):
    x = standardized_ar(200000, coeffs, np.random.default_rng(101))
    _, rho1 = lyapunov_moments(coeffs)
    assert x.var() == pytest.approx(1.0, rel=0.02)
    assert np.corrcoef(x[:-1], x[1:])[0, 1] == pytest.approx(rho1, abs=0.02)


def test_standardized_ar_shapes_and_determinism():
    a = standardized_ar(50, FACTOR_AR, np.random.default_rng(102), size=(3, 2))
    b = standardized_ar(50, FACTOR_AR, np.random.default_rng(102), size=(3, 2))
    assert a.shape == (3, 2, 50)
    np.testing.assert_array_equal(a, b)


def test_standardized_ar_rejects_nonstationary():
    with pytest.raises(ValueError):
        standardized_ar(10, (1.1, 0.0, 0.0, 0.0, 0.0), np.random.default_rng(0))
    with pytest.raises(ValueError):
        ar_stationary_autocovariances((0.5, 0.5))


# ---------------------------------------------------------------- loadings


def test_generate_loadings_no_scaling():
    rng_a = np.random.default_rng(103)
    rng_b = np.random.default_rng(103)
    a = generate_loadings(6, 2, -2.0, 2.0, (0.0, 0.0), rng_a)
    b = rng_b.uniform(-2.0, 2.0, size=(6, 2))
    np.testing.assert_array_equal(a, b)


def test_generate_loadings_column_scaling():
    rng_a = np.random.default_rng(104)
    rng_b = np.random.default_rng(104)
    scaled = generate_loadings(4, 2, -1.0, 1.0, (0.5, 0.0), rng_a)
    raw = generate_loadings(4, 2, -1.0, 1.0, (0.0, 0.0), rng_b)
    np.testing.assert_allclose(scaled[:, 0], 0.5 * raw[:, 0], rtol=1e-12)
    np.testing.assert_array_equal(scaled[:, 1], raw[:, 1])


def test_generate_loadings_uniform_moment():
    d = 10000
    a = generate_loadings(d, 2, 0.0, 2.0, (0.0, 0.3), np.random.default_rng(105))
    # mean of U(0,2) is 1 with sd 1/sqrt(3); 3-sigma band for the column mean
    band = 3.0 / np.sqrt(3.0 * d)
    assert abs(a[:, 0].mean() - 1.0) <= band
    assert abs(a[:, 1].mean() - d**-0.3) <= band * d**-0.3
    assert np.all(a >= 0.0)  # u in (0, 2) keeps every entry non-negative


def test_generate_loadings_rejects_bad_bounds():
    with pytest.raises(ValueError):
        generate_loadings(4, 1, 1.0, 1.0, (0.0,), np.random.default_rng(0))
    with pytest.raises(ValueError):
        generate_loadings(4, 2, 0.0, 1.0, (0.0,), np.random.default_rng(0))


# ---------------------------------------------------------------- noise


def test_noise_sparsity_one_kills_common_part():
    cfg = DgpConfig(dims=(5, 3), t_steps=40, ranks=(1, 1), mixing_sparsity=1.0)
    _, parts = generate_noise(cfg, np.random.default_rng(106), return_parts=True)
    np.testing.assert_array_equal(parts["mixing"], np.zeros((3, 5, cfg.r_common)))


def test_noise_mixing_is_per_fibre():
    cfg = DgpConfig(dims=(5, 3), t_steps=40, ranks=(1, 1), mixing_sparsity=0.0)
    _, parts = generate_noise(cfg, np.random.default_rng(109), return_parts=True)
    assert parts["mixing"].shape == (3, 5, cfg.r_common)
    assert not np.array_equal(parts["mixing"][0], parts["mixing"][1])


def test_noise_covariance_construction():
    cfg = DgpConfig(dims=(6, 4), t_steps=30, ranks=(1, 1))
    _, parts = generate_noise(cfg, np.random.default_rng(107), return_parts=True)
    for cov, root in zip(parts["covariances"], parts["roots"]):
        np.testing.assert_allclose(cov, cov.T, atol=1e-12)
        values = np.linalg.eigvalsh(cov)
        assert values.min() >= 1.0 - 1e-10
        assert values.max() <= 3.0 + 1e-10
        np.testing.assert_allclose(root @ root, cov, atol=1e-10)


def test_noise_long_run_variance_identity():
    cfg = DgpConfig(dims=(4, 3), t_steps=60000, ranks=(1, 1))
    noise, parts = generate_noise(cfg, np.random.default_rng(108), return_parts=True)
    columns = series_unfold(noise, 0)  # (T, d_1, n_fibres)
    theory = np.einsum("lir,lir->il", parts["mixing"], parts["mixing"]) + np.stack(
        [np.diag(c) for c in parts["covariances"]], axis=1
    )
    sample = columns.var(axis=0)
    assert np.abs(sample / theory - 1.0).max() <= 0.03


# ---------------------------------------------------------------- simulation


def test_simulate_noiseless_rank1_has_exact_multilinear_rank():
    cfg = DgpConfig(dims=(5, 4, 3), t_steps=30, ranks=(1, 1, 1), noise_scale=0.0)
    truth = simulate_setting(cfg, "Ia")
    centered = truth.series - truth.mean[None]
    for k in range(3):
        stack = series_unfold(centered, k)
        flat = stack.transpose(1, 0, 2).reshape(cfg.dims[k], -1)
        s = np.linalg.svd(flat, compute_uv=False)
        assert s[1] <= 1e-10 * s[0]


def test_simulate_deterministic_and_finite():
    cfg = DgpConfig(dims=(6, 5), t_steps=20, seed=42)
    a = simulate_setting(cfg, "IIb")
    b = simulate_setting(cfg, "IIb")
    np.testing.assert_array_equal(a.series, b.series)
    assert a.series.shape == (20, 6, 5)
    assert np.all(np.isfinite(a.series))
    for u in a.bases:
        np.testing.assert_allclose(u.T @ u, np.eye(u.shape[1]), atol=1e-10)
    # bases span the loadings
    for u, loading in zip(a.bases, a.loadings):
        proj = u @ (u.T @ loading)
        np.testing.assert_allclose(proj, loading, atol=1e-8)


def test_simulate_rejects_unknown_setting():
    cfg = DgpConfig(dims=(4, 4), t_steps=10)
    with pytest.raises(ValueError):
        simulate_setting(cfg, "IV")
    with pytest.raises(ValueError):
        simulate_setting(DgpConfig(dims=(4, 4), t_steps=10, ranks=(3, 3)), "IIa")


def test_config_validation():
    with pytest.raises(ValueError):
        DgpConfig(dims=(4,), t_steps=1)
    with pytest.raises(ValueError):
        DgpConfig(dims=(4,), t_steps=10, ranks=(5,))
    with pytest.raises(ValueError):
        DgpConfig(dims=(4, 4), t_steps=10, strength_exponents=((0.6, 0.0), (0.0, 0.0)))
    with pytest.raises(ValueError):
        DgpConfig(dims=(4, 4), t_steps=10, factor_ar=(0.5, 0.1))


# ---------------------------------------------------------------- CAPM


def test_capm_perfect_fit():
    rng = np.random.default_rng(109)
    market = rng.standard_normal(50)
    panel = 2.0 * market[:, None] * np.ones((1, 4))
    np.testing.assert_allclose(capm_betas(panel, market), 2.0 * np.ones(4), rtol=1e-12)
    np.testing.assert_allclose(capm_residuals(panel, market), np.zeros((50, 4)), atol=1e-12)


def test_capm_rejects_constant_market():
    with pytest.raises(ValueError):
        capm_residuals(np.random.default_rng(110).standard_normal((10, 3)), np.ones(10))


def test_capm_independent_panel():
    rng = np.random.default_rng(111)
    market = rng.standard_normal(20000)
    panel = rng.standard_normal((20000, 3))
    betas = capm_betas(panel, market)
    assert np.abs(betas).max() < 0.05
    resid = capm_residuals(panel, market)
    centered = panel - panel.mean(axis=0)
    assert np.abs(resid - centered).max() < 0.25
    np.testing.assert_allclose(resid.mean(axis=0), np.zeros(3), atol=1e-10)


def test_capm_residuals_uncorrelated_with_market():
    rng = np.random.default_rng(112)
    market = rng.standard_normal(60)
    panel = np.outer(market, rng.standard_normal(5)) + rng.standard_normal((60, 5))
    resid = capm_residuals(panel, market)
    x = market - market.mean()
    scale = np.abs(panel).max() * np.abs(x).max() * 60
    assert np.abs(x @ resid).max() <= 1e-10 * scale
    assert np.abs(resid.mean(axis=0)).max() <= 1e-10 * np.abs(panel).max()
