"""Baseline loading-space estimators: time-series HOSVD and HOOI.

Both treat the time axis as the replication dimension.  HOSVD takes, per
mode, the top eigenvectors of the covariance of the centered unfolded data.
HOOI starts from HOSVD and alternates: each sweep re-estimates every mode
from data projected onto the other modes' current bases, all modes updating
from the previous sweep (Jacobi).
"""

from __future__ import annotations

import numpy as np

from .preaverage import LoadingEstimate
from .tensor_ops import DegenerateDataError, eigen_sym, series_mode_product, series_unfold

_ZERO_SIGNAL_REL = 1e-20


def _mode_covariance(series, mode):
    """(1/T) sum_t M_t M_t' for the mode unfoldings of an already-centered series."""
    mats = series_unfold(series, mode)
    return np.einsum("tij,tkj->ik", mats, mats) / series.shape[0]


def _check_ranks(x, ranks):
    dims = x.shape[1:]
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(dims):
        raise ValueError(f"need one rank per mode, got {len(ranks)} for {len(dims)} modes")
    for k, (r, d) in enumerate(zip(ranks, dims)):
        if not 1 <= r <= d:
            raise ValueError(f"rank {r} out of range for mode {k} of length {d}")
    return ranks


def hosvd(x, ranks):
    """Per-mode PCA of the centered series.

    Parameters
    ----------
    x : ndarray, shape (T, d_1, ..., d_K)
    ranks : sequence of int
        Number of columns to keep per mode.

    Returns
    -------
    list of LoadingEstimate, one per mode, tagged ``hosvd``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim < 2 or x.shape[0] < 2:
        raise ValueError("expected a (T, d_1, ..., d_K) series with T >= 2")
    ranks = _check_ranks(x, ranks)
    centered = x - x.mean(axis=0)
    out = []
    for k, r in enumerate(ranks):
        cov = _mode_covariance(centered, k)
        dec = eigen_sym(cov)
        raw = series_unfold(x, k)
        if dec.values[0] <= _ZERO_SIGNAL_REL * float(np.mean(raw**2)):
            raise DegenerateDataError(f"mode {k} covariance is numerically zero after centering")
        out.append(
            LoadingEstimate(
                mode=k, columns=dec.vectors[:, :r], eigenvalues=dec.values[:r], method="hosvd"
            )
        )
    return out


def hooi(x, ranks, iters=30):
    """Alternating refinement of the HOSVD bases.

    Each sweep projects the centered data onto the other modes' bases from
    the previous sweep and keeps the top eigenvectors of the projected
    covariance.  Runs exactly ``iters`` sweeps (no early stop).
    """
    x = np.asarray(x, dtype=float)
    if iters < 1:
        raise ValueError("iters must be at least 1")
    ranks = _check_ranks(x, ranks)
    estimates = hosvd(x, ranks)
    bases = [e.columns for e in estimates]
    centered = x - x.mean(axis=0)
    n_modes = x.ndim - 1
    for _ in range(iters):
        new_bases = []
        new_values = []
        for k in range(n_modes):
            shrunk = centered
            for j in range(n_modes):
                if j != k:
                    shrunk = series_mode_product(shrunk, bases[j].T, j)
            cov = _mode_covariance(shrunk, k)
            dec = eigen_sym(cov)
            if dec.values[0] <= 0.0:
                raise DegenerateDataError(f"mode {k} projected covariance is zero")
            new_bases.append(dec.vectors[:, : ranks[k]])
            new_values.append(dec.values[: ranks[k]])
        bases = new_bases
        values = new_values
    return [
        LoadingEstimate(mode=k, columns=bases[k], eigenvalues=values[k], method="hooi")
        for k in range(n_modes)
    ]


def tucker_fit(x, estimates):
    """Diagnostic: energy of the centered series captured by the bases.

    Returns ``sum_t ||(X_t - Xbar) projected onto every mode's basis||_F^2``,
    non-decreasing over HOOI sweeps on noise-free data.
    """
    x = np.asarray(x, dtype=float)
    centered = x - x.mean(axis=0)
    core = centered
    for est in estimates:
        core = series_mode_product(core, est.columns.T, est.mode)
    return float(np.sum(core**2))
