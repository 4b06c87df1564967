"""Decomposition primitives: truncated SVD, pseudoinverse, least squares.

These wrap numpy's LAPACK-backed routines behind the contracts the rest of
the package relies on (descending spectra, minimum-norm solutions, explicit
relative cutoffs). All computation is float64.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .validation import check_matrix, check_same_rows


class SvdResult(NamedTuple):
    """Rank-k truncated SVD: ``a ~ u @ diag(sigma) @ vt``."""

    u: np.ndarray      # (n, k), orthonormal columns
    sigma: np.ndarray  # (k,), non-negative, descending
    vt: np.ndarray     # (k, d), orthonormal rows


def default_rcond(shape: tuple[int, int]) -> float:
    """Standard spectral cutoff: max(n, d) times float64 machine epsilon."""
    return max(shape) * np.finfo(np.float64).eps


def svd(a, k: int | None = None) -> SvdResult:
    """Thin SVD truncated to the k largest singular values.

    k defaults to min(rows, cols); must satisfy 1 <= k <= min(rows, cols).
    """
    arr = check_matrix(a, "a")
    full = min(arr.shape)
    if k is None:
        k = full
    if not 1 <= k <= full:
        raise ValueError(f"k must be in [1, {full}], got {k}")
    u, s, vt = np.linalg.svd(arr, full_matrices=False)
    return SvdResult(u[:, :k], s[:k], vt[:k, :])


def pinv(a, rcond: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse with a relative spectral cutoff.

    Singular values below ``rcond * sigma_max`` are treated as zero. The
    default rcond is ``max(shape) * eps``.
    """
    arr = check_matrix(a, "a")
    if rcond is None:
        rcond = default_rcond(arr.shape)
    if rcond < 0:
        raise ValueError(f"rcond must be >= 0, got {rcond}")
    return np.linalg.pinv(arr, rcond=rcond)


def lstsq(x, y, rcond: float | None = None) -> np.ndarray:
    """Minimum-norm least-squares solution W of ||y - x @ W||_F.

    Solved via SVD (pseudoinverse solution), so rank-deficient x is handled;
    among all minimizers the one of least Frobenius norm is returned.
    """
    xa = check_matrix(x, "x")
    ya = check_matrix(y, "y")
    check_same_rows(xa, ya)
    if rcond is None:
        rcond = default_rcond(xa.shape)
    w, _, _, _ = np.linalg.lstsq(xa, ya, rcond=rcond)
    return w
