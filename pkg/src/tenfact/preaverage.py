"""Pre-averaging initial estimator of the factor loading directions.

For one mode ``k``, random subsets of the other modes' indices are drawn,
the corresponding mode-``k`` fibres are summed into a ``(T, d_k)`` series,
and the covariance of each summed series is scored by the ratio of its
largest eigenvalue to a bulk eigenvalue.  High-ratio samples concentrate on
the strongest factor direction; the covariances of the best samples are
averaged and the top eigenvectors of that aggregate are the estimate.

With ``n_keep = 1`` this is the maximum eigenvalue ratio estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tensor_ops import DegenerateDataError, centered_covariance, eigen_sym

# a sample whose summed series has top eigenvalue at or below this fraction of
# the series mean square carries no usable signal
_ZERO_SIGNAL_REL = 1e-20

# bulk eigenvalue at or below this fraction of the top one marks a
# rank-deficient sample (ratio would overflow / be meaningless)
_RANK_DEFICIENT_REL = 1e-12


class DegenerateSampleError(RuntimeError):
    """Raised when a bulk eigenvalue underflows and the ratio is meaningless."""


@dataclass
class FiberSampleSet:
    """One random fibre group: per-mode index subsets for every mode but one.

    ``subsets[l]`` holds the sampled indices of mode ``l`` for each ``l`` other
    than ``mode``; the group is their Cartesian product.
    """

    mode: int
    subsets: dict[int, np.ndarray]
    er_score: float | None = None

    @property
    def product_size(self):
        return int(np.prod([len(v) for v in self.subsets.values()])) if self.subsets else 1


@dataclass
class LoadingEstimate:
    """Estimated orthonormal basis of one mode's loading space.

    ``columns`` is ``(d_k, z)`` with orthonormal columns, ``eigenvalues`` the
    matching top eigenvalues in descending order, and ``method`` records which
    estimator produced it.
    """

    mode: int
    columns: np.ndarray
    eigenvalues: np.ndarray
    method: str


@dataclass
class PreaverageConfig:
    """Tuning knobs for :func:`preaverage_direction`.

    ``n_draws`` samples are drawn, the ``n_keep`` best by eigenvalue ratio are
    aggregated, and ``n_directions`` eigenvectors are returned.  ``sizes`` maps
    mode -> subset size; unspecified modes use ``floor(frac * d_l)`` (at least
    one).  ``bulk_index`` is the 1-based position of the bulk eigenvalue in
    the ratio; by default the midpoint ``floor(min(T, d_k) / 2)``.
    """

    n_draws: int = 200
    n_keep: int = 5
    frac: float = 0.5
    sizes: dict[int, int] = field(default_factory=dict)
    n_directions: int = 1
    bulk_index: int | None = None

    def __post_init__(self):
        if self.n_draws < 1:
            raise ValueError("n_draws must be positive")
        if not 1 <= self.n_keep <= self.n_draws:
            raise ValueError("n_keep must lie in [1, n_draws]")
        if not 0.0 < self.frac <= 1.0:
            raise ValueError("frac must lie in (0, 1]")
        if self.n_directions < 1:
            raise ValueError("n_directions must be positive")

    def size_for(self, mode, d):
        n = self.sizes.get(mode, max(1, math.floor(self.frac * d)))
        if not 1 <= n <= d:
            raise ValueError(f"subset size {n} out of range for mode {mode} of length {d}")
        return int(n)


def sum_fibers(x, mode, sample=None):
    """Sum mode-``mode`` fibres of every tensor in the series.

    Parameters
    ----------
    x : ndarray, shape (T, d_1, ..., d_K)
    mode : int
    sample : FiberSampleSet, optional
        Restricts the sum to the Cartesian product of the sample's per-mode
        subsets.  ``None`` sums every fibre.

    Returns
    -------
    ndarray, shape (T, d_mode)
    """
    x = np.asarray(x)
    n_modes = x.ndim - 1
    if not 0 <= mode < n_modes:
        raise ValueError(f"mode {mode} out of range")
    out = x
    # summing over a Cartesian product factorizes into one sum per mode
    for l in range(n_modes):
        if l == mode:
            continue
        axis = l + 1
        if sample is not None:
            idx = np.asarray(sample.subsets.get(l), dtype=np.intp)
            if idx.size == 0:
                raise ValueError(f"empty subset for mode {l}")
            if idx.min() < 0 or idx.max() >= x.shape[axis]:
                raise ValueError(f"subset for mode {l} out of range")
            if np.unique(idx).size != idx.size:
                raise ValueError(f"subset for mode {l} has repeated indices")
            out = out.take(idx, axis=axis)
        out = out.sum(axis=axis, keepdims=True)
    return out.reshape(x.shape[0], x.shape[mode + 1])


def sample_index_sets(dims, mode, cfg=None, rng=None):
    """Draw the random fibre groups for one mode.

    Each of ``cfg.n_draws`` samples holds, for every mode ``l != mode``, a
    uniform without-replacement subset of ``cfg.size_for(l, d_l)`` indices.
    All draws come from ``rng`` in sample order, one mode at a time.
    """
    dims = tuple(int(d) for d in dims)
    if not 0 <= mode < len(dims):
        raise ValueError(f"mode {mode} out of range for dims {dims}")
    cfg = cfg if cfg is not None else PreaverageConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    others = [l for l in range(len(dims)) if l != mode]
    sizes = {l: cfg.size_for(l, dims[l]) for l in others}
    samples = []
    for _ in range(cfg.n_draws):
        subsets = {
            l: np.sort(rng.choice(dims[l], size=sizes[l], replace=False)) for l in others
        }
        samples.append(FiberSampleSet(mode=mode, subsets=subsets))
    return samples


def eigenvalue_ratio(cov, bulk_index):
    """Ratio of the top eigenvalue to the ``bulk_index``-th largest one.

    ``bulk_index`` is 1-based.  Raises :class:`DegenerateSampleError` when the
    bulk eigenvalue underflows relative to the top one.
    """
    return _ratio_from_values(eigen_sym(cov).values, bulk_index)


def _ratio_from_values(values, bulk_index):
    if not 1 <= bulk_index <= values.size:
        raise ValueError(f"bulk_index {bulk_index} out of range for size {values.size}")
    top = values[0]
    bulk = values[bulk_index - 1]
    if top <= 0.0 or bulk <= _RANK_DEFICIENT_REL * top:
        raise DegenerateSampleError("bulk eigenvalue underflows; ratio undefined")
    return float(top / bulk)


def preaverage_direction(x, mode, cfg=None, rng=None):
    """Pre-averaging estimate of one mode's strongest loading directions.

    Parameters
    ----------
    x : ndarray, shape (T, d_1, ..., d_K)
    mode : int
    cfg : PreaverageConfig, optional
    rng : numpy Generator, optional

    Returns
    -------
    (LoadingEstimate, list of FiberSampleSet)
        The estimate holds the top ``cfg.n_directions`` eigenvectors of the
        covariance aggregated over the ``cfg.n_keep`` best-scoring samples;
        the list holds those chosen samples with their scores filled in.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim < 2 or x.shape[0] < 2:
        raise ValueError("expected a (T, d_1, ..., d_K) series with T >= 2")
    cfg = cfg if cfg is not None else PreaverageConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    d_k = x.shape[mode + 1]
    if cfg.n_directions > d_k:
        raise ValueError(f"cannot return {cfg.n_directions} directions for mode length {d_k}")
    bulk_index = cfg.bulk_index
    if bulk_index is None:
        bulk_index = max(1, min(x.shape[0], d_k) // 2)

    samples = sample_index_sets(x.shape[1:], mode, cfg, rng)
    covariances = np.empty((cfg.n_draws, d_k, d_k))
    scores = np.empty(cfg.n_draws)
    any_signal = False
    for i, sample in enumerate(samples):
        summed = sum_fibers(x, mode, sample)
        cov = centered_covariance(summed)
        covariances[i] = cov
        values = eigen_sym(cov).values
        try:
            scores[i] = _ratio_from_values(values, bulk_index)
        except DegenerateSampleError:
            scores[i] = 1.0
        if values[0] > _ZERO_SIGNAL_REL * float(np.mean(summed**2)):
            any_signal = True
        sample.er_score = float(scores[i])
    if not any_signal:
        raise DegenerateDataError("every fibre sample has numerically zero covariance")

    # best score first; ties resolved by lowest sample index
    order = np.lexsort((np.arange(cfg.n_draws), -scores))
    chosen = order[: cfg.n_keep]
    aggregate = covariances[chosen].mean(axis=0)
    dec = eigen_sym(aggregate)
    method = "max-er" if cfg.n_keep == 1 else "pre-averaged"
    estimate = LoadingEstimate(
        mode=mode,
        columns=dec.vectors[:, : cfg.n_directions],
        eigenvalues=dec.values[: cfg.n_directions],
        method=method,
    )
    return estimate, [samples[i] for i in chosen]
