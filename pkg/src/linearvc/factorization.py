"""Shared-content factorization across speakers.

Stacks per-speaker feature matrices describing the same content side by
side, takes a rank-r truncated SVD of the block, and reads off one r x D
map per speaker from the right-singular vectors. The singular values are
folded into the (transient) content coordinates, so the stored speaker maps
are plain blocks of V^T, which keeps their pseudoinverses well conditioned.
Conversion composes ``x @ pinv(S_src) @ S_tgt``, a linear map of rank at
most r.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import lvcf
from .linalg import pinv
from .matching import MatchedPairs, gather_targets, match_frames
from .validation import check_matrix

DEFAULT_RANK = 100
DEFAULT_CONVERT_RCOND = 1e-10
FACT_MANIFEST = "manifest.json"


@dataclass(frozen=True)
class SpeakerFactorization:
    """Rank-r factorization: each speaker's frames ~ content @ speaker map."""

    rank: int
    speaker_ids: tuple[str, ...]
    sigma: np.ndarray                     # (rank,), descending
    speaker_maps: tuple[np.ndarray, ...]  # one (rank, content_dim) block per speaker
    content_dim: int
    pivot_id: str
    effective_rank: int = field(default=0)

    def map_for(self, speaker_id: str) -> np.ndarray:
        try:
            return self.speaker_maps[self.speaker_ids.index(speaker_id)]
        except ValueError:
            raise ValueError(
                f"unknown speaker id {speaker_id!r}; known ids: {list(self.speaker_ids)}"
            ) from None


def default_speaker_ids(k: int) -> tuple[str, ...]:
    return tuple(f"spk{i:02d}" for i in range(k))


def assemble_block(
    speaker_mats: Sequence[np.ndarray],
    pivot: int,
    k_match: int = 1,
    aligned: bool = False,
) -> tuple[np.ndarray, dict[int, MatchedPairs]]:
    """Build the N x (K*D) block of content-matched frames.

    Block j holds, for each pivot frame, the (k-mean-pooled) nearest frame
    from speaker j under cosine distance; the pivot's own block is its
    frames unchanged. With ``aligned=True`` the matrices are taken as
    already frame-parallel (row i of every speaker carries the same
    content) and pairing is the identity; this is the right mode for
    synthetic corpora with known alignment, where cross-speaker cosine
    matching is not meaningful.

    Returns the block and the per-speaker index pairs used.
    """
    mats = [check_matrix(m, f"speaker_mats[{i}]") for i, m in enumerate(speaker_mats)]
    if len(mats) < 2:
        raise ValueError(f"need at least 2 speakers, got {len(mats)}")
    dims = {m.shape[1] for m in mats}
    if len(dims) != 1:
        raise ValueError(f"speakers must share the feature dimension, got {sorted(dims)}")
    if not 0 <= pivot < len(mats):
        raise ValueError(f"pivot must be in [0, {len(mats) - 1}], got {pivot}")
    n = mats[pivot].shape[0]
    if aligned and any(m.shape[0] != n for m in mats):
        raise ValueError("aligned=True requires equal frame counts across speakers")

    identity = np.arange(n, dtype=np.int64)
    blocks = []
    alignment: dict[int, MatchedPairs] = {}
    for j, mat in enumerate(mats):
        if j == pivot or aligned:
            alignment[j] = MatchedPairs(identity, identity, np.zeros(n))
            blocks.append(mat)
        else:
            pairs = match_frames(mats[pivot], mat, k_match)
            alignment[j] = pairs
            blocks.append(gather_targets(pairs, mat, k_match))
    return np.hstack(blocks), alignment


def factorize(
    block,
    k_speakers: int,
    d: int,
    r: int,
    speaker_ids: Sequence[str] | None = None,
    pivot_id: str | None = None,
) -> SpeakerFactorization:
    """Rank-r truncated SVD of the block, split into per-speaker maps.

    The block's squared reconstruction error equals the sum of discarded
    squared singular values (Eckart-Young). When the block has fewer than r
    non-zero singular values the factorization still succeeds; the
    effective numerical rank is reported on the result.
    """
    arr = check_matrix(block, "block")
    if arr.shape[1] != k_speakers * d:
        raise ValueError(
            f"block has {arr.shape[1]} columns, expected k_speakers*d = {k_speakers * d}"
        )
    if not 1 <= r <= min(arr.shape):
        raise ValueError(f"r must be in [1, {min(arr.shape)}], got {r}")
    if speaker_ids is None:
        speaker_ids = default_speaker_ids(k_speakers)
    if len(speaker_ids) != k_speakers:
        raise ValueError(f"got {len(speaker_ids)} speaker ids for {k_speakers} speakers")
    if pivot_id is None:
        pivot_id = min(speaker_ids)
    if pivot_id not in speaker_ids:
        raise ValueError(f"pivot id {pivot_id!r} not among speaker ids")

    _, sigma, vt = np.linalg.svd(arr, full_matrices=False)
    return _from_spectrum(sigma, vt, r, k_speakers, d, tuple(speaker_ids), pivot_id, arr.shape)


def _from_spectrum(sigma, vt, r, k_speakers, d, speaker_ids, pivot_id, block_shape):
    cutoff = max(block_shape) * np.finfo(np.float64).eps * (sigma[0] if len(sigma) else 0.0)
    effective = int(np.count_nonzero(sigma > cutoff))
    maps = tuple(vt[:r, j * d : (j + 1) * d].copy() for j in range(k_speakers))
    return SpeakerFactorization(
        rank=r,
        speaker_ids=speaker_ids,
        sigma=sigma[:r].copy(),
        speaker_maps=maps,
        content_dim=d,
        pivot_id=pivot_id,
        effective_rank=min(effective, r),
    )


def convert(
    fact: SpeakerFactorization,
    x_src,
    src: str,
    tgt: str,
    rcond: float = DEFAULT_CONVERT_RCOND,
) -> np.ndarray:
    """Project into the shared content space and out to the target speaker.

    ``x @ pinv(S_src) @ S_tgt`` -- the composed D x D map has rank <= r.
    """
    x = check_matrix(x_src, "x_src")
    if x.shape[1] != fact.content_dim:
        raise ValueError(
            f"x_src has {x.shape[1]} columns but the factorization uses {fact.content_dim}"
        )
    s_src = fact.map_for(src)
    s_tgt = fact.map_for(tgt)
    return x @ pinv(s_src, rcond=rcond) @ s_tgt


EvalHook = Callable[[SpeakerFactorization], Mapping[str, float]]


def rank_sweep(
    speaker_mats: Sequence[np.ndarray],
    pivot: int,
    ranks: Sequence[int],
    eval_hook: EvalHook | None = None,
    k_match: int = 1,
    aligned: bool = False,
    speaker_ids: Sequence[str] | None = None,
) -> dict[int, dict[str, float]]:
    """Factorize at each rank, reusing a single SVD of the block.

    Every row of the report carries the relative block reconstruction error
    plus whatever metrics ``eval_hook`` computes from the truncated
    factorization.
    """
    if len(ranks) == 0:
        raise ValueError("ranks must be non-empty")
    block, _ = assemble_block(speaker_mats, pivot, k_match=k_match, aligned=aligned)
    k_speakers = len(speaker_mats)
    d = block.shape[1] // k_speakers
    if speaker_ids is None:
        speaker_ids = default_speaker_ids(k_speakers)
    pivot_id = tuple(speaker_ids)[pivot]

    _, sigma, vt = np.linalg.svd(block, full_matrices=False)
    total = float(np.sum(sigma**2))
    report: dict[int, dict[str, float]] = {}
    for r in ranks:
        if not 1 <= r <= min(block.shape):
            raise ValueError(f"r must be in [1, {min(block.shape)}], got {r}")
        fact = _from_spectrum(
            sigma, vt, r, k_speakers, d, tuple(speaker_ids), pivot_id, block.shape
        )
        discarded = float(np.sum(sigma[r:] ** 2))
        row = {"reconstruction_relerr": float(np.sqrt(discarded / total)) if total else 0.0}
        if eval_hook is not None:
            row.update({k: float(v) for k, v in eval_hook(fact).items()})
        report[int(r)] = row
    return report


def sweep_to_csv(report: Mapping[int, Mapping[str, float]], path) -> None:
    """Emit a sweep report as ``rank,metric_name,value`` rows."""
    lines = ["rank,metric_name,value"]
    for rank in sorted(report):
        for name in sorted(report[rank]):
            lines.append(f"{rank},{name},{report[rank][name]!r}")
    lvcf.atomic_write_bytes(("\n".join(lines) + "\n").encode(), path)


def read_sweep_csv(path) -> dict[int, dict[str, float]]:
    report: dict[int, dict[str, float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            report.setdefault(int(row["rank"]), {})[row["metric_name"]] = float(row["value"])
    return report


def save_factorization(fact: SpeakerFactorization, directory) -> None:
    """Directory layout: sigma.lvcf, one S_<id>.lvcf per speaker, manifest."""
    os.makedirs(directory, exist_ok=True)
    lvcf.write_matrix(fact.sigma.reshape(1, -1), os.path.join(directory, "sigma.lvcf"))
    for sid, smap in zip(fact.speaker_ids, fact.speaker_maps):
        lvcf.write_matrix(smap, os.path.join(directory, f"S_{sid}.lvcf"))
    manifest = {
        "rank": fact.rank,
        "content_dim": fact.content_dim,
        "k_speakers": len(fact.speaker_ids),
        "pivot_id": fact.pivot_id,
        "speaker_ids": list(fact.speaker_ids),
        "effective_rank": fact.effective_rank,
    }
    raw = json.dumps(manifest, sort_keys=True, indent=2).encode() + b"\n"
    lvcf.atomic_write_bytes(raw, os.path.join(directory, FACT_MANIFEST))


def load_factorization(directory) -> SpeakerFactorization:
    with open(os.path.join(directory, FACT_MANIFEST), encoding="utf-8") as fh:
        manifest = json.load(fh)
    sigma = lvcf.read_matrix(os.path.join(directory, "sigma.lvcf"))[0]
    maps = tuple(
        lvcf.read_matrix(os.path.join(directory, f"S_{sid}.lvcf"))
        for sid in manifest["speaker_ids"]
    )
    return SpeakerFactorization(
        rank=int(manifest["rank"]),
        speaker_ids=tuple(manifest["speaker_ids"]),
        sigma=sigma,
        speaker_maps=maps,
        content_dim=int(manifest["content_dim"]),
        pivot_id=manifest["pivot_id"],
        effective_rank=int(manifest["effective_rank"]),
    )


class ContentFactorization(BaseEstimator):
    """Estimator wrapper: fit on a list of speaker matrices, then convert.

    Parameters
    ----------
    rank : int
        Number of singular values retained; 100 is a solid operating point
        for 1024-dim speech features.
    pivot : str or None
        Speaker id used as the matching reference; None picks the first id
        lexicographically.
    k_match : int
        Neighbours mean-pooled when matching non-pivot speakers.
    aligned : bool
        Treat inputs as frame-parallel and skip matching.
    rcond : float
        Relative cutoff for the source-map pseudoinverse during conversion.
    """

    def __init__(
        self,
        rank: int = DEFAULT_RANK,
        pivot: str | None = None,
        k_match: int = 1,
        aligned: bool = False,
        rcond: float = DEFAULT_CONVERT_RCOND,
    ):
        self.rank = rank
        self.pivot = pivot
        self.k_match = k_match
        self.aligned = aligned
        self.rcond = rcond

    def fit(self, X: Sequence[np.ndarray], speaker_ids: Sequence[str] | None = None):
        """X is a sequence of per-speaker feature matrices sharing D."""
        if speaker_ids is None:
            speaker_ids = default_speaker_ids(len(X))
        speaker_ids = tuple(str(s) for s in speaker_ids)
        if len(set(speaker_ids)) != len(speaker_ids):
            raise ValueError("speaker ids must be unique")
        pivot_id = min(speaker_ids) if self.pivot is None else self.pivot
        if pivot_id not in speaker_ids:
            raise ValueError(f"pivot id {pivot_id!r} not among speaker ids")
        pivot_index = speaker_ids.index(pivot_id)

        block, alignment = assemble_block(
            X, pivot_index, k_match=self.k_match, aligned=self.aligned
        )
        self.factorization_ = factorize(
            block,
            k_speakers=len(X),
            d=block.shape[1] // len(X),
            r=self.rank,
            speaker_ids=speaker_ids,
            pivot_id=pivot_id,
        )
        self.alignment_ = alignment
        return self

    def convert(self, X, src: str, tgt: str) -> np.ndarray:
        if not hasattr(self, "factorization_"):
            raise NotFittedError("this ContentFactorization has not been fitted")
        return convert(self.factorization_, X, src, tgt, rcond=self.rcond)
