"""Synthetic data generation and panel preprocessing.

The simulated model is ``X_t = mu + F_t x_1 A_1 ... x_K A_K + E_t``: a mean
tensor, a core factor series pushed through per-mode loading matrices, and a
noise series with one cross-sectionally shared component plus per-fibre
colored idiosyncratic noise.  Factor and noise innovations follow fixed
AR(5) processes, standardized to unit stationary variance.  Loading matrices
draw i.i.d. uniform entries; factor strength is controlled by scaling column
``j`` with ``d^{-exponent_j}``.

Also includes market-model (CAPM) residualization for preprocessing real
return panels before factor analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .tensor_ops import series_fold

FACTOR_AR = (0.7, 0.3, -0.4, 0.2, -0.1)
COMMON_NOISE_AR = (-0.7, -0.3, -0.4, 0.2, 0.1)
IDIO_NOISE_AR = (0.8, 0.4, -0.4, 0.2, -0.1)

#: named simulation settings: uniform loading bounds and per-factor strength
#: exponents (applied to every mode; the all-zero families accept any rank)
SETTINGS = {
    "Ia": ((-2.0, 2.0), (0.0, 0.0)),
    "Ib": ((0.0, 2.0), (0.0, 0.0)),
    "IIa": ((-2.0, 2.0), (0.0, 0.2)),
    "IIb": ((0.0, 2.0), (0.0, 0.2)),
    "IIIa": ((-2.0, 2.0), (0.1, 0.2)),
    "IIIb": ((0.0, 2.0), (0.1, 0.2)),
}


@dataclass
class DgpConfig:
    """Everything needed to simulate one replication.

    ``strength_exponents`` holds one tuple per mode with one exponent in
    ``[0, 0.5]`` per factor; ``None`` means all zeros (strong factors).
    ``noise_scale`` multiplies the noise series; 0 gives noiseless data.
    """

    dims: tuple[int, ...]
    t_steps: int
    ranks: tuple[int, ...] | None = None
    r_common: int = 10
    loading_low: float = -2.0
    loading_high: float = 2.0
    strength_exponents: tuple[tuple[float, ...], ...] | None = None
    factor_ar: tuple[float, ...] = FACTOR_AR
    common_ar: tuple[float, ...] = COMMON_NOISE_AR
    idio_ar: tuple[float, ...] = IDIO_NOISE_AR
    mixing_sparsity: float = 0.7
    noise_eig_low: float = 1.0
    noise_eig_high: float = 3.0
    noise_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.dims) < 1 or any(d < 1 for d in self.dims):
            raise ValueError("dims must be positive")
        if self.t_steps < 2:
            raise ValueError("t_steps must be at least 2")
        if self.ranks is None:
            self.ranks = tuple(2 for _ in self.dims)
        self.ranks = tuple(int(r) for r in self.ranks)
        if len(self.ranks) != len(self.dims):
            raise ValueError("need one rank per mode")
        for k, (r, d) in enumerate(zip(self.ranks, self.dims)):
            if not 1 <= r <= d:
                raise ValueError(f"rank {r} out of range for mode {k} of length {d}")
        if self.r_common < 1:
            raise ValueError("r_common must be positive")
        if not self.loading_low < self.loading_high:
            raise ValueError("loading bounds must satisfy low < high")
        if self.strength_exponents is not None:
            self.strength_exponents = tuple(
                tuple(float(z) for z in row) for row in self.strength_exponents
            )
            if len(self.strength_exponents) != len(self.dims):
                raise ValueError("need one exponent tuple per mode")
            for k, row in enumerate(self.strength_exponents):
                if len(row) != self.ranks[k]:
                    raise ValueError(f"mode {k} needs {self.ranks[k]} exponents")
                if any(not 0.0 <= z <= 0.5 for z in row):
                    raise ValueError("strength exponents must lie in [0, 0.5]")
        for name in ("factor_ar", "common_ar", "idio_ar"):
            coeffs = tuple(float(c) for c in getattr(self, name))
            if len(coeffs) != 5:
                raise ValueError(f"{name} must have exactly 5 coefficients")
            setattr(self, name, coeffs)
        if not 0.0 <= self.mixing_sparsity <= 1.0:
            raise ValueError("mixing_sparsity must lie in [0, 1]")
        if not 0.0 < self.noise_eig_low <= self.noise_eig_high:
            raise ValueError("noise eigenvalue bounds must satisfy 0 < low <= high")
        if self.noise_scale < 0.0:
            raise ValueError("noise_scale must be non-negative")

    def exponents_for(self, mode):
        if self.strength_exponents is None:
            return (0.0,) * self.ranks[mode]
        return self.strength_exponents[mode]


@dataclass
class DgpGroundTruth:
    """One simulated replication with everything needed for scoring."""

    loadings: list[np.ndarray]
    bases: list[np.ndarray]
    mean: np.ndarray
    series: np.ndarray
    factors: np.ndarray
    noise: np.ndarray


def ar_stationary_autocovariances(coeffs, n_lags=None):
    """Stationary autocovariances of an AR process with unit innovations.

    Solves the Yule-Walker system for lags ``0..n_lags`` (default: the AR
    order).  Raises on non-stationary coefficients.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    p = coeffs.size
    if p == 0:
        return np.array([1.0])
    companion = np.zeros((p, p))
    companion[0] = coeffs
    companion[1:, :-1] = np.eye(p - 1)
    if np.abs(np.linalg.eigvals(companion)).max() >= 1.0:
        raise ValueError("AR coefficients are not stationary")
    system = np.zeros((p + 1, p + 1))
    rhs = np.zeros(p + 1)
    rhs[0] = 1.0
    for j in range(p + 1):
        system[j, j] += 1.0
        for i in range(1, p + 1):
            system[j, abs(j - i)] -= coeffs[i - 1]
    gamma = np.linalg.solve(system, rhs)
    n_lags = p if n_lags is None else int(n_lags)
    if n_lags <= p:
        return gamma[: n_lags + 1]
    out = np.empty(n_lags + 1)
    out[: p + 1] = gamma
    for j in range(p + 1, n_lags + 1):
        out[j] = coeffs @ out[j - 1 : j - p - 1 : -1]
    return out


def standardized_ar(t_steps, coeffs, rng, size=(), burn_in=500):
    """Simulate standardized AR streams with standard normal innovations.

    Returns shape ``size + (t_steps,)``.  After a ``burn_in`` warm-up from a
    zero state, each stream is scaled by the theoretical stationary standard
    deviation (Yule-Walker), so the marginal variance is exactly 1.
    """
    if t_steps < 1:
        raise ValueError("t_steps must be positive")
    size = (size,) if np.isscalar(size) else tuple(size)
    gamma0 = ar_stationary_autocovariances(coeffs)[0]
    innovations = rng.standard_normal(size + (burn_in + t_steps,))
    denominator = np.concatenate([[1.0], -np.asarray(coeffs, dtype=float)])
    stream = lfilter([1.0], denominator, innovations, axis=-1)
    return stream[..., burn_in:] / np.sqrt(gamma0)


def generate_loadings(d, r, low, high, exponents, rng):
    """Loading matrix with i.i.d. Uniform(low, high) entries.

    Column ``j`` is scaled by ``d ** -exponents[j]``; exponent 0 keeps the
    raw draw (a strong factor), larger exponents weaken the factor.
    """
    if not low < high:
        raise ValueError("need low < high")
    exponents = np.asarray(exponents, dtype=float)
    if exponents.shape != (r,):
        raise ValueError(f"need {r} exponents")
    raw = rng.uniform(low, high, size=(d, r))
    return raw * d ** (-exponents)


def generate_noise(cfg, rng, return_parts=False):
    """Noise series ``(T, d_1, ..., d_K)`` built on the mode-0 unfolding.

    Column ``l`` of each unfolding is ``Psi_l e_t + sqrtm(Sigma_l) eps_{t,l}``:
    a per-fibre sparse mixing of ``r_common`` shared AR streams plus per-fibre
    colored noise whose covariance has a random orthogonal eigenbasis and
    eigenvalues i.i.d. uniform in the configured bounds.  The mixing matrices
    are independent across fibres, so cross-fibre correlations stay weak (the
    summed mixing grows like the square root of the fibre count) and the
    common streams never masquerade as an extra factor.

    Draw order (one stream): mixing values, mixing mask, common streams,
    per-fibre eigenvectors and eigenvalues (fibre by fibre), idio streams.
    """
    d_first = cfg.dims[0]
    d_rest = int(np.prod(cfg.dims[1:], dtype=np.int64)) if len(cfg.dims) > 1 else 1
    mixing = rng.standard_normal((d_rest, d_first, cfg.r_common))
    mixing[rng.random((d_rest, d_first, cfg.r_common)) < cfg.mixing_sparsity] = 0.0
    common = standardized_ar(cfg.t_steps, cfg.common_ar, rng, size=(cfg.r_common,))
    roots = np.empty((d_rest, d_first, d_first))
    covariances = np.empty_like(roots)
    for l in range(d_rest):
        gauss = rng.standard_normal((d_first, d_first))
        basis, upper = np.linalg.qr(gauss)
        basis = basis * np.sign(np.where(np.diag(upper) == 0, 1.0, np.diag(upper)))
        eigenvalues = rng.uniform(cfg.noise_eig_low, cfg.noise_eig_high, size=d_first)
        roots[l] = (basis * np.sqrt(eigenvalues)) @ basis.T
        covariances[l] = (basis * eigenvalues) @ basis.T
    idio = standardized_ar(cfg.t_steps, cfg.idio_ar, rng, size=(d_rest, d_first))
    columns = np.matmul(mixing, common) + np.matmul(roots, idio)  # (d_rest, d_first, T)
    stacked = columns.transpose(2, 1, 0)  # (T, d_first, d_rest)
    series = series_fold(stacked, cfg.dims, 0)
    if return_parts:
        return series, {"mixing": mixing, "covariances": covariances, "roots": roots}
    return series


def simulate_setting(cfg, setting="custom", rng=None):
    """Simulate one replication of a named setting (or the cfg as given).

    A named tag overrides the loading bounds and strength exponents; the
    ``custom`` tag uses ``cfg`` unchanged.  ``rng`` defaults to a fresh
    generator seeded with ``cfg.seed``.  Draw order: mean, loadings (mode
    by mode), factor streams, noise.
    """
    cfg = _apply_setting(cfg, setting)
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    n_modes = len(cfg.dims)
    mean = rng.standard_normal(cfg.dims)
    loadings = [
        generate_loadings(
            cfg.dims[k], cfg.ranks[k], cfg.loading_low, cfg.loading_high,
            cfg.exponents_for(k), rng,
        )
        for k in range(n_modes)
    ]
    factor_streams = standardized_ar(cfg.t_steps, cfg.factor_ar, rng, size=cfg.ranks)
    factors = np.moveaxis(factor_streams, -1, 0)  # (T, r_1, ..., r_K)
    common = factors
    for k in range(n_modes):
        moved = np.tensordot(common, loadings[k], axes=([k + 1], [1]))
        common = np.moveaxis(moved, -1, k + 1)
    noise = generate_noise(cfg, rng)
    series = mean[None] + common + cfg.noise_scale * noise
    bases = []
    for a in loadings:
        u = np.linalg.svd(a, full_matrices=False)[0]
        for j in range(u.shape[1]):
            i = int(np.argmax(np.abs(u[:, j])))
            if u[i, j] < 0:
                u[:, j] = -u[:, j]
        bases.append(u)
    return DgpGroundTruth(
        loadings=loadings,
        bases=bases,
        mean=mean,
        series=series,
        factors=factors,
        noise=cfg.noise_scale * noise,
    )


def _apply_setting(cfg, setting):
    if setting == "custom":
        return cfg
    if setting not in SETTINGS:
        raise ValueError(f"unknown setting tag {setting!r}")
    (low, high), per_factor = SETTINGS[setting]
    exponents = []
    for k, r in enumerate(cfg.ranks):
        if all(z == 0.0 for z in per_factor):
            exponents.append((0.0,) * r)
        elif r == len(per_factor):
            exponents.append(per_factor)
        else:
            raise ValueError(f"setting {setting} fixes {len(per_factor)} factors per mode")
    return DgpConfig(
        dims=cfg.dims,
        t_steps=cfg.t_steps,
        ranks=cfg.ranks,
        r_common=cfg.r_common,
        loading_low=low,
        loading_high=high,
        strength_exponents=tuple(exponents),
        factor_ar=cfg.factor_ar,
        common_ar=cfg.common_ar,
        idio_ar=cfg.idio_ar,
        mixing_sparsity=cfg.mixing_sparsity,
        noise_eig_low=cfg.noise_eig_low,
        noise_eig_high=cfg.noise_eig_high,
        noise_scale=cfg.noise_scale,
        seed=cfg.seed,
    )


def capm_betas(panel, market):
    """Per-column slope of the market-model regression."""
    panel = np.asarray(panel, dtype=float)
    market = np.asarray(market, dtype=float).ravel()
    if panel.ndim != 2 or panel.shape[0] != market.size:
        raise ValueError("panel must be (T, n) with one market return per row")
    x = market - market.mean()
    denominator = float(x @ x)
    if denominator <= 0.0:
        raise ValueError("market series is constant")
    centered = panel - panel.mean(axis=0)
    return x @ centered / denominator


def capm_residuals(panel, market):
    """Market-model residuals ``y_t - ybar - beta (x_t - xbar)`` per column."""
    panel = np.asarray(panel, dtype=float)
    market = np.asarray(market, dtype=float).ravel()
    betas = capm_betas(panel, market)
    x = market - market.mean()
    centered = panel - panel.mean(axis=0)
    return centered - np.outer(x, betas)
