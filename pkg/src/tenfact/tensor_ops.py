"""Dense tensor algebra used throughout the package.

Conventions
-----------
A tensor is a plain ``numpy`` array of shape ``(d_1, ..., d_K)``.  A tensor
time series stacks ``T`` observations along a leading axis, giving shape
``(T, d_1, ..., d_K)``.  Modes are 0-based.

Storage order is generalized column-major: flattening a tensor enumerates
the first index fastest (``order="F"``).  The mode-``k`` unfolding follows
the same convention, so column ``j`` of ``unfold(x, k)`` holds the mode-``k``
fibre at the multi-index whose remaining indices satisfy

    j = sum_{l != k} i_l * prod_{m < l, m != k} d_m .

Under this pairing the usual identities hold exactly:

    unfold(mode_product chain, k) = a_k @ unfold(core, k) @ kron_chain(...).T
    vec(mode_product chain)       = (a_K kron ... kron a_1) @ vec(core)

where ``vec`` is column-major flattening.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateDataError(RuntimeError):
    """Raised when data carry no usable signal (numerically zero covariance)."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order with matching sign-fixed eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def unfold(x, mode):
    """Return the mode-``mode`` unfolding of a tensor.

    Parameters
    ----------
    x : ndarray, shape (d_1, ..., d_K)
    mode : int
        0-based mode index.

    Returns
    -------
    ndarray, shape (d_mode, prod of the other dims)
        Columns enumerate the remaining indices with the first mode fastest.
    """
    x = np.asarray(x)
    if not 0 <= mode < x.ndim:
        raise ValueError(f"mode {mode} out of range for a {x.ndim}-way tensor")
    return np.reshape(np.moveaxis(x, mode, 0), (x.shape[mode], -1), order="F")


def fold(mat, dims, mode):
    """Inverse of :func:`unfold`: rebuild the tensor with shape ``dims``."""
    mat = np.asarray(mat)
    dims = tuple(int(d) for d in dims)
    if not 0 <= mode < len(dims):
        raise ValueError(f"mode {mode} out of range for dims {dims}")
    rest = [d for i, d in enumerate(dims) if i != mode]
    if mat.shape != (dims[mode], int(np.prod(rest, dtype=np.int64))):
        raise ValueError(f"matrix shape {mat.shape} does not match dims {dims} at mode {mode}")
    stacked = np.reshape(mat, [dims[mode]] + rest, order="F")
    return np.moveaxis(stacked, 0, mode)


def mode_product(x, a, mode):
    """Multiply a tensor by a matrix along one mode.

    ``mode_product(x, a, k)`` replaces every mode-``k`` fibre ``v`` of ``x``
    by ``a @ v``; the result has ``a.shape[0]`` entries along mode ``k``.
    """
    x = np.asarray(x)
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError("mode_product expects a matrix")
    if a.shape[1] != x.shape[mode]:
        raise ValueError(
            f"matrix has {a.shape[1]} columns but mode {mode} has length {x.shape[mode]}"
        )
    dims = list(x.shape)
    dims[mode] = a.shape[0]
    return fold(a @ unfold(x, mode), dims, mode)


def kron_chain_skipping(mats, skip):
    """Kronecker product ``m_K kron ... kron m_1`` with ``mats[skip]`` left out.

    The factor of the highest mode sits leftmost, matching the unfolding
    convention.  With a single mode the chain is empty and the 1x1 identity
    is returned.
    """
    if not 0 <= skip < len(mats):
        raise ValueError(f"skip index {skip} out of range")
    out = None
    for i in reversed(range(len(mats))):
        if i == skip:
            continue
        out = np.asarray(mats[i]) if out is None else np.kron(out, mats[i])
    if out is None:
        return np.eye(1)
    return out


def kron_vec_skipping(vecs, skip):
    """Kronecker chain of 1-d vectors skipping one; ``ones(1)`` for one mode."""
    out = None
    for i in reversed(range(len(vecs))):
        if i == skip:
            continue
        v = np.asarray(vecs[i], dtype=float).ravel()
        out = v if out is None else np.kron(out, v)
    if out is None:
        return np.ones(1)
    return out


def centered_covariance(rows):
    """Covariance ``(1/T) sum_t (x_t - xbar)(x_t - xbar)'`` of row observations.

    Parameters
    ----------
    rows : ndarray, shape (T, n)
        One observation per row, ``T >= 2``.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2:
        raise ValueError("expected a (T, n) array of row observations")
    t = rows.shape[0]
    if t < 2:
        raise ValueError("need at least two observations to centre a covariance")
    xc = rows - rows.mean(axis=0)
    return xc.T @ xc / t


def eigen_sym(m, symmetry_tol=1e-8):
    """Eigendecomposition of a symmetric matrix with fixed ordering and signs.

    Eigenvalues are sorted in descending order (stable under ties).  Each
    eigenvector is scaled so its entry of largest magnitude (lowest index on
    ties) is non-negative.  The input is symmetrized as ``(m + m.T) / 2``
    before the decomposition; a matrix asymmetric beyond ``symmetry_tol``
    (relative to its magnitude) is rejected.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(m).max()))
    if float(np.abs(m - m.T).max()) > symmetry_tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    values, vectors = np.linalg.eigh(0.5 * (m + m.T))
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    return EigenDecomposition(values, _fix_signs(vectors))


def _fix_signs(vectors):
    """Flip eigenvector signs so the largest-magnitude entry is non-negative."""
    vectors = np.array(vectors)
    for j in range(vectors.shape[1]):
        i = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[i, j] < 0:
            vectors[:, j] = -vectors[:, j]
    return vectors


def series_unfold(x, mode):
    """Unfold every tensor in a series: ``(T, d_1..d_K) -> (T, d_mode, rest)``.

    ``series_unfold(x, k)[t]`` equals ``unfold(x[t], k)``.
    """
    x = np.asarray(x)
    k_ax = mode + 1
    if not 1 <= k_ax < x.ndim:
        raise ValueError(f"mode {mode} out of range for series of {x.ndim - 1}-way tensors")
    rest = [ax for ax in range(1, x.ndim) if ax != k_ax]
    # trailing axes in descending mode order make a C-order reshape enumerate
    # the lowest mode fastest, matching the column-major unfolding
    moved = np.transpose(x, [0, k_ax] + rest[::-1])
    return np.ascontiguousarray(moved).reshape(x.shape[0], x.shape[k_ax], -1)


def series_fold(mats, dims, mode):
    """Inverse of :func:`series_unfold` for a ``(T, d_mode, rest)`` stack."""
    mats = np.asarray(mats)
    dims = tuple(int(d) for d in dims)
    k = len(dims)
    rest = [d for i, d in enumerate(dims) if i != mode]
    expected = (mats.shape[0], dims[mode], int(np.prod(rest, dtype=np.int64)))
    if mats.shape != expected:
        raise ValueError(f"stack shape {mats.shape} does not match dims {dims} at mode {mode}")
    stacked = mats.reshape((mats.shape[0], dims[mode]) + tuple(rest[::-1]))
    axis_order = [0, mode + 1] + [ax for ax in range(1, k + 1) if ax != mode + 1][::-1]
    return np.transpose(stacked, np.argsort(axis_order))


def series_mode_product(x, a, mode):
    """Apply ``mode_product(., a, mode)`` to every tensor in a series."""
    x = np.asarray(x)
    a = np.asarray(a)
    if a.shape[1] != x.shape[mode + 1]:
        raise ValueError(
            f"matrix has {a.shape[1]} columns but mode {mode} has length {x.shape[mode + 1]}"
        )
    out = np.tensordot(x, a, axes=([mode + 1], [1]))
    return np.moveaxis(out, -1, mode + 1)
