"""Nearest-neighbour frame matching under cosine distance.

Pairs every source frame with its closest target frame(s), producing the
(X, Y) training set for linear map fitting and the regression targets of
the k-nearest-neighbour baseline converter. The reference algorithm is an
exhaustive scan over all source/target pairs; the implementation blocks the
scan for cache efficiency but is exactly equivalent, including the
tie-break rule (lowest target index wins).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_matrix, check_same_cols

ZERO_NORM_EPS = 1e-12
_BLOCK_ROWS = 1024
# Bound on the gap between a BLAS-accumulated dot product and the canonical
# single-threaded reduction; the true value is ~D*eps (<= 1e-12 for D=4096).
_REFINE_GUARD = 1e-9
_CANDIDATE_PAD = 8


@dataclass(frozen=True)
class MatchedPairs:
    """Parallel (source index, target index, cosine distance) triples.

    With k neighbours per source frame the arrays have length N*k, grouped
    per source frame with the k matches in ascending distance order.
    """

    source_indices: np.ndarray
    target_indices: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        n = len(self.source_indices)
        if len(self.target_indices) != n or len(self.distances) != n:
            raise ValueError("source_indices, target_indices and distances must be parallel")

    def __len__(self) -> int:
        return len(self.source_indices)

    def to_matrix(self) -> np.ndarray:
        """3-column (source index, target index, distance) matrix for export.

        Indices are exactly representable as float32 for any realistic frame
        count, so the result can be written as LVCF for debugging.
        """
        return np.column_stack(
            [
                self.source_indices.astype(np.float64),
                self.target_indices.astype(np.float64),
                self.distances,
            ]
        )


def cosine_distance(a, b) -> float:
    """1 - cos(a, b); returns 1.0 if either vector has norm below 1e-12."""
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape or av.ndim != 1:
        raise ValueError(f"expected two vectors of equal length, got {av.shape} and {bv.shape}")
    if not (np.all(np.isfinite(av)) and np.all(np.isfinite(bv))):
        raise ValueError("inputs must be finite")
    na = np.linalg.norm(av)
    nb = np.linalg.norm(bv)
    if na < ZERO_NORM_EPS or nb < ZERO_NORM_EPS:
        return 1.0
    return float(1.0 - (av @ bv) / (na * nb))


def _unit_rows(a: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(a, axis=1, keepdims=True)
    safe = np.where(norms < ZERO_NORM_EPS, 1.0, norms)
    out = a / safe
    out[norms[:, 0] < ZERO_NORM_EPS] = 0.0  # zero-norm rows: distance 1 to everything
    return out


def _canonical_distances(src_rows: np.ndarray, tgt_rows: np.ndarray) -> np.ndarray:
    """Row-wise cosine distances via a fixed single-threaded reduction.

    BLAS products vary at the ulp level with thread count and operand
    position, so every distance that is compared or stored goes through this
    one code path; equal input rows then always produce equal values.
    """
    d = 1.0 - np.einsum("ij,ij->i", np.ascontiguousarray(src_rows),
                        np.ascontiguousarray(tgt_rows))
    return np.clip(d, 0.0, 2.0)


def match_frames(source, target, k: int = 1) -> MatchedPairs:
    """Find the k nearest target frames for each source frame.

    Matches are ordered by ascending cosine distance; exact ties go to the
    lower target index. Equivalent to the exhaustive scan and deterministic
    under any BLAS thread count: a blocked matrix product only proposes
    candidates, which are re-scored canonically, with a guarded fallback to
    a full re-scan for rows whose ties straddle the candidate boundary.
    """
    src = check_matrix(source, "source")
    tgt = check_matrix(target, "target")
    check_same_cols(src, tgt, "source", "target")
    m = tgt.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"k must be in [1, {m}], got {k}")

    src_unit = _unit_rows(src)
    tgt_unit = _unit_rows(tgt)

    n = src.shape[0]
    pad = min(m, k + _CANDIDATE_PAD)
    target_idx = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k), dtype=np.float64)
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n)
        rows = stop - start
        block = 1.0 - src_unit[start:stop] @ tgt_unit.T
        if pad == m:
            cand = np.broadcast_to(np.arange(m, dtype=np.int64), (rows, m)).copy()
        else:
            cand = np.argpartition(block, pad - 1, axis=1)[:, :pad].astype(np.int64)
        flat_rows = np.repeat(np.arange(rows), pad)
        cd = _canonical_distances(
            src_unit[start:stop][flat_rows], tgt_unit[cand.ravel()]
        )
        # sort per row by (distance, index); row ids keep the groups intact
        perm = np.lexsort((cand.ravel(), cd, flat_rows))
        cand_sorted = cand.ravel()[perm].reshape(rows, pad)
        dist_sorted = cd[perm].reshape(rows, pad)
        target_idx[start:stop] = cand_sorted[:, :k]
        distances[start:stop] = dist_sorted[:, :k]

        if pad < m:
            # a row is only safe if nothing outside the candidate set could
            # beat its k-th selected distance, allowing for BLAS error
            outside_min = np.partition(block, pad, axis=1)[:, pad]
            for i in np.flatnonzero(outside_min <= dist_sorted[:, k - 1] + _REFINE_GUARD):
                full = _canonical_distances(
                    np.broadcast_to(src_unit[start + i], tgt_unit.shape), tgt_unit
                )
                order = np.lexsort((np.arange(m), full))[:k]
                target_idx[start + i] = order
                distances[start + i] = full[order]

    source_idx = np.repeat(np.arange(n, dtype=np.int64), k)
    return MatchedPairs(source_idx, target_idx.ravel(), distances.ravel())


def gather_targets(pairs: MatchedPairs, target, k: int = 1) -> np.ndarray:
    """Mean-pool the k matched target rows per source frame.

    Row i of the result is the mean of source frame i's k matches (for k=1,
    exactly the matched row).
    """
    tgt = check_matrix(target, "target")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(pairs) % k != 0:
        raise ValueError(f"pair count {len(pairs)} is not a multiple of k={k}")
    idx = pairs.target_indices
    if idx.min() < 0 or idx.max() >= tgt.shape[0]:
        raise ValueError(
            f"target index out of range: [{idx.min()}, {idx.max()}] for {tgt.shape[0]} rows"
        )
    gathered = tgt[idx].reshape(len(pairs) // k, k, tgt.shape[1])
    return gathered.mean(axis=1)
