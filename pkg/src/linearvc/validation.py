"""Input validation helpers shared across the package.

All numerical routines operate on validated 2-D float64 arrays; validation
happens once at the public entry points so the internals can assume clean
inputs.
"""

from __future__ import annotations

import numpy as np


def check_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate a feature matrix: 2-D, at least 1x1, finite, float64."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_vector(v, name: str = "vector") -> np.ndarray:
    """Validate a 1-D finite float64 vector."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_same_cols(a: np.ndarray, b: np.ndarray, a_name: str = "x", b_name: str = "y") -> None:
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"{a_name} and {b_name} must share the feature dimension: "
            f"{a.shape[1]} != {b.shape[1]}"
        )


def check_same_rows(a: np.ndarray, b: np.ndarray, a_name: str = "x", b_name: str = "y") -> None:
    if a.shape[0] != b.shape[0]:
        raise ValueError(
            f"{a_name} and {b_name} must have the same number of rows: "
            f"{a.shape[0]} != {b.shape[0]}"
        )
