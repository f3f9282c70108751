"""Iterative projection refinement of per-mode directions.

Starting from initial unit vectors (one per mode, typically from
pre-averaging), each sweep projects the centered data onto the Kronecker
product of the other modes' current vectors and replaces each mode's vector
by the top eigenvector of the projected second-moment matrix.  Projection
shrinks the effective noise, so the refined directions converge toward the
strongest loading direction of each mode.  A final eigenanalysis of the
projected second moment yields the whole loading space of a mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .preaverage import LoadingEstimate
from .tensor_ops import DegenerateDataError, eigen_sym, kron_vec_skipping, series_unfold

# projected data whose top eigenvalue is at or below this fraction of the
# data's own mean square is treated as identically zero
_ZERO_PROJECTION_REL = 1e-20


@dataclass
class ProjectionState:
    """Refined per-mode unit vectors with the convergence trace.

    ``history[i]`` is the largest sign-aligned direction change across modes
    at sweep ``i``; its length equals ``iterations`` (early stop included).
    """

    vectors: list[np.ndarray]
    iterations: int
    history: list[float]


def project_data(x, mode, q_minus_k):
    """Project the centered series onto one direction of the other modes.

    Returns the ``(T, d_mode)`` array whose row ``t`` is
    ``unfold(X_t - Xbar, mode) @ q_minus_k``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim < 2 or x.shape[0] < 2:
        raise ValueError("expected a (T, d_1, ..., d_K) series with T >= 2")
    q = np.asarray(q_minus_k, dtype=float).ravel()
    d_rest = int(np.prod(x.shape[1:], dtype=np.int64)) // x.shape[mode + 1]
    if q.size != d_rest:
        raise ValueError(f"direction has length {q.size}, expected {d_rest}")
    if not np.linalg.norm(q) > 0.0:
        raise ValueError("projection direction has zero norm")
    centered = x - x.mean(axis=0)
    return series_unfold(centered, mode) @ q


def refine_directions(x, init, iters=30, tol=1e-8, sweep="jacobi"):
    """Run the iterative projection sweeps.

    Parameters
    ----------
    x : ndarray, shape (T, d_1, ..., d_K)
    init : sequence of per-mode vectors
        One vector per mode; normalized defensively.
    iters : int
        Sweep budget; stops early once the largest sign-aligned direction
        change falls below ``tol``.
    sweep : {"jacobi", "gauss-seidel"}
        Jacobi updates every mode from the previous sweep's vectors;
        Gauss-Seidel feeds each update the vectors refined earlier in the
        same sweep.

    Returns
    -------
    ProjectionState
    """
    x = np.asarray(x, dtype=float)
    n_modes = x.ndim - 1
    if x.ndim < 2 or x.shape[0] < 2:
        raise ValueError("expected a (T, d_1, ..., d_K) series with T >= 2")
    if len(init) != n_modes:
        raise ValueError(f"need {n_modes} initial vectors, got {len(init)}")
    if iters < 1:
        raise ValueError("iters must be at least 1")
    if sweep not in ("jacobi", "gauss-seidel"):
        raise ValueError(f"unknown sweep kind {sweep!r}")

    centered = x - x.mean(axis=0)
    mats = [series_unfold(centered, k) for k in range(n_modes)]
    vectors = []
    for k, v in enumerate(init):
        v = np.asarray(v, dtype=float).ravel()
        if v.size != x.shape[k + 1]:
            raise ValueError(f"initial vector for mode {k} has wrong length")
        norm = np.linalg.norm(v)
        if not norm > 0.0:
            raise ValueError(f"initial vector for mode {k} has zero norm")
        vectors.append(v / norm)

    history = []
    for _ in range(iters):
        source = list(vectors) if sweep == "gauss-seidel" else vectors
        updated = [None] * n_modes
        for k in range(n_modes):
            updated[k] = _top_direction(mats[k], source, k, x.shape[0])
            if sweep == "gauss-seidel":
                source[k] = updated[k]
        change = max(
            min(
                np.linalg.norm(updated[k] - vectors[k]),
                np.linalg.norm(updated[k] + vectors[k]),
            )
            for k in range(n_modes)
        )
        vectors = updated
        history.append(float(change))
        if change < tol:
            break
    return ProjectionState(vectors=vectors, iterations=len(history), history=history)


def _top_direction(mat_k, vectors, k, t_steps):
    """Top eigenvector of the second moment of one mode's projected data."""
    q_rest = kron_vec_skipping(vectors, k)
    y = mat_k @ q_rest
    second_moment = y.T @ y / t_steps
    dec = eigen_sym(second_moment)
    if dec.values[0] <= _ZERO_PROJECTION_REL * float(np.mean(mat_k**2)):
        raise DegenerateDataError(f"projected data for mode {k} is numerically zero")
    return dec.vectors[:, 0]


def estimate_loading_space(x, mode, state, rank):
    """Loading-space estimate for one mode from the refined directions.

    Projects the centered data one more time with the final vectors of the
    other modes and returns the top ``rank`` eigenvectors of the projected
    second moment, tagged ``projected``.
    """
    x = np.asarray(x, dtype=float)
    n_modes = x.ndim - 1
    d_k = x.shape[mode + 1]
    if not 1 <= rank <= d_k:
        raise ValueError(f"rank {rank} out of range for mode length {d_k}")
    if len(state.vectors) != n_modes:
        raise ValueError("state does not match the series' number of modes")
    centered = x - x.mean(axis=0)
    mat_k = series_unfold(centered, mode)
    q_rest = kron_vec_skipping(state.vectors, mode)
    y = mat_k @ q_rest
    second_moment = y.T @ y / x.shape[0]
    dec = eigen_sym(second_moment)
    if dec.values[0] <= _ZERO_PROJECTION_REL * float(np.mean(mat_k**2)):
        raise DegenerateDataError(f"projected data for mode {mode} is numerically zero")
    return LoadingEstimate(
        mode=mode,
        columns=dec.vectors[:, :rank],
        eigenvalues=dec.values[:rank],
        method="projected",
    )
