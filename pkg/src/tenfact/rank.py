"""Bootstrap rank selection by correlation-eigenvalue thresholding.

For one mode, the centered data are projected onto randomly reweighted
copies of the refined direction of the other modes.  Each bootstrap draw
keeps every projected fibre with a Bernoulli dropout and a uniform
resampling multiplicity.  The number of factors is read off the correlation
matrix of each draw's projected series: eigenvalues above ``1 + C/sqrt(T)``
count as factors.  The constant ``C`` is chosen where the bootstrap rank
counts vary least, and the final rank is the most frequent count at that
constant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .tensor_ops import DegenerateDataError, eigen_sym, kron_vec_skipping, series_unfold


@dataclass
class BootstrapWeights:
    """One draw of the fibre-resampling matrix ``W``.

    Column ``i`` of ``W`` is ``active[i] * e_{targets[i]}``: every column has
    at most one nonzero entry, equal to one.  The action of ``W W'`` on a
    vector multiplies entry ``j`` by the number of active columns targeting
    ``j``.
    """

    size: int
    targets: np.ndarray
    active: np.ndarray

    def resample_vector(self, q):
        q = np.asarray(q, dtype=float).ravel()
        if q.size != self.size:
            raise ValueError(f"vector has length {q.size}, expected {self.size}")
        counts = np.bincount(self.targets[self.active], minlength=self.size)
        return counts * q

    def matrix(self):
        w = np.zeros((self.size, self.size))
        cols = np.flatnonzero(self.active)
        w[self.targets[cols], cols] = 1.0
        return w


@dataclass
class RankDecision:
    """Selected rank for one mode with the evidence behind it."""

    mode: int
    rank_hat: int
    c_hat: float
    bootstrap_ranks: np.ndarray
    variance_curve: np.ndarray  # (len(c_grid), 2) columns (C, sample variance)


@dataclass
class RankConfig:
    """Bootstrap rank-selection knobs.

    ``n_boot`` draws, Bernoulli keep-probability ``p``, and the threshold
    grid ``c_grid`` (ascending; ``None`` means 1000 points 0.1, 0.2, ...,
    100).  The grid must reach well past the bulk of the correlation
    spectrum: sample bulk eigenvalues under serially correlated noise can sit
    several times above 1, and the stable threshold zone between bulk and
    factor eigenvalues is only found if the grid covers it.
    """

    n_boot: int = 50
    p: float = 0.5
    c_grid: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.n_boot < 2:
            raise ValueError("n_boot must be at least 2")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")
        if self.c_grid is None:
            self.c_grid = np.round(np.arange(1, 1001) * 0.1, 10)
        else:
            self.c_grid = np.asarray(self.c_grid, dtype=float)
            if self.c_grid.size == 0 or np.any(np.diff(self.c_grid) <= 0):
                raise ValueError("c_grid must be nonempty and strictly ascending")


def correlation_from_covariance(s):
    """Rescale a PSD matrix to unit diagonal: ``D^{-1/2} S D^{-1/2}``."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("expected a square matrix")
    d = np.diag(s)
    if np.any(d <= 0.0):
        raise DegenerateDataError("dead coordinate: non-positive diagonal entry")
    scale = 1.0 / np.sqrt(d)
    r = s * np.outer(scale, scale)
    r = 0.5 * (r + r.T)
    np.fill_diagonal(r, 1.0)
    return r


def rank_threshold(r, eta):
    """Number of correlation eigenvalues above ``1 + eta`` (0 when none)."""
    if eta < 0.0:
        raise ValueError("eta must be non-negative")
    values = eigen_sym(r).values
    return int(np.count_nonzero(values > 1.0 + eta))


def bootstrap_weights(size, p, rng):
    """Draw one resampling matrix: uniform targets, Bernoulli(p) activations."""
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    if size < 1:
        raise ValueError("size must be positive")
    targets = rng.integers(0, size, size=size)
    active = rng.random(size) < p
    return BootstrapWeights(size=int(size), targets=targets, active=active)


def estimate_rank(x, mode, state, cfg=None, rng=None):
    """Bootstrap rank decision for one mode.

    Parameters
    ----------
    x : ndarray, shape (T, d_1, ..., d_K)
    mode : int
    state : ProjectionState
        Refined per-mode directions; the other modes' final vectors form the
        projection direction.
    cfg : RankConfig, optional
    rng : numpy Generator, optional

    Returns
    -------
    RankDecision

    Notes
    -----
    Draws for all ``cfg.n_boot`` bootstrap samples are generated up front
    from ``rng`` so the result does not depend on evaluation order.  A draw
    whose projected series has a dead coordinate is skipped with a warning
    (it carries no rank information); if fewer than two draws survive a
    :class:`DegenerateDataError` is raised.  Grid points whose threshold
    tops some draw's largest eigenvalue are likewise ignored: counts clip
    at zero there by construction, which fakes stability.  When that holds
    already at the smallest threshold the decision is rank 0.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim < 2 or x.shape[0] < 2:
        raise ValueError("expected a (T, d_1, ..., d_K) series with T >= 2")
    cfg = cfg if cfg is not None else RankConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    t_steps = x.shape[0]
    d_k = x.shape[mode + 1]

    centered = x - x.mean(axis=0)
    mat_k = series_unfold(centered, mode)
    q_rest = kron_vec_skipping(state.vectors, mode)
    draws = [bootstrap_weights(q_rest.size, cfg.p, rng) for _ in range(cfg.n_boot)]

    thresholds = 1.0 + cfg.c_grid / np.sqrt(t_steps)
    rows = []
    n_degenerate = 0
    for draw in draws:
        y = mat_k @ draw.resample_vector(q_rest)
        second_moment = y.T @ y / t_steps
        try:
            corr = correlation_from_covariance(second_moment)
        except DegenerateDataError:
            n_degenerate += 1
            continue  # a dead coordinate says nothing about the rank
        values = eigen_sym(corr).values
        # eigenvalues descend, so the count above each threshold is a prefix
        ascending = values[::-1]
        rows.append(values.size - np.searchsorted(ascending, thresholds, side="right"))
    if len(rows) < 2:
        raise DegenerateDataError(
            f"only {len(rows)} of {cfg.n_boot} bootstrap draws were usable"
        )
    if n_degenerate:
        warnings.warn(
            f"{n_degenerate} of {cfg.n_boot} bootstrap draws were degenerate and were skipped",
            RuntimeWarning,
            stacklevel=2,
        )
    counts = np.asarray(rows, dtype=np.int64)

    variances = counts.var(axis=0, ddof=1)
    # Per-draw counts fall as C grows, so the grid points where every draw
    # still clears the threshold form a prefix.  Beyond it some draw's count
    # clips at zero, and the clipping floor manufactures spuriously stable
    # zones, so those points must not compete in the variance minimization.
    n_informative = int(np.count_nonzero(counts.min(axis=0) >= 1))
    if n_informative == 0:
        warnings.warn(
            f"mode {mode}: a bootstrap draw counts zero already at the "
            "smallest threshold; rank 0",
            RuntimeWarning,
            stacklevel=2,
        )
        return RankDecision(
            mode=mode,
            rank_hat=0,
            c_hat=float(cfg.c_grid[0]),
            bootstrap_ranks=counts[:, 0],
            variance_curve=np.column_stack([cfg.c_grid, variances]),
        )
    c_index = _min_variance_index(variances[:n_informative])
    bootstrap_ranks = counts[:, c_index]
    rank_hat = int(np.argmax(np.bincount(bootstrap_ranks, minlength=d_k + 1)))
    return RankDecision(
        mode=mode,
        rank_hat=rank_hat,
        c_hat=float(cfg.c_grid[c_index]),
        bootstrap_ranks=bootstrap_ranks,
        variance_curve=np.column_stack([cfg.c_grid, variances]),
    )


def _min_variance_index(variances):
    """Index of the smallest C attaining the minimal variance.

    The variance curve typically hits its minimum on one contiguous zone of
    C per stable gap in the bootstrap spectra.  The earliest zone is the gap
    just above the noise bulk, which separates all factors from the bulk;
    later zones sit between factor eigenvalues and would undercount.  Taking
    the first minimising index lands in that earliest zone.
    """
    return int(np.argmin(variances))
