"""Objective evaluation: word/character error rates and equal error rate.

WER/CER reduce to Levenshtein distance over normalized token sequences.
EER sweeps all observed score thresholds; the sweep is purely order-based,
so any positive affine rescaling of the scores leaves the result unchanged
exactly. Scores from an external verifier can be imported as CSV and fed
to ``eer`` unchanged; ``verification_scores`` provides a hermetic
mean-embedding cosine verifier for synthetic pipelines.
"""

from __future__ import annotations

import csv
import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import lvcf
from .validation import check_matrix

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
ZERO_NORM_EPS = 1e-12


class MetricUndefinedError(ValueError):
    """Raised when a rate has an empty reference and is undefined."""


@dataclass(frozen=True)
class ScoreSet:
    """Verification trial scores; higher means more target-like."""

    genuine: tuple[float, ...]
    impostor: tuple[float, ...]

    def __post_init__(self):
        for name, values in (("genuine", self.genuine), ("impostor", self.impostor)):
            if len(values) == 0:
                raise ValueError(f"{name} scores must be non-empty")
            if not all(np.isfinite(v) for v in values):
                raise ValueError(f"{name} scores must be finite")


@dataclass(frozen=True)
class ErrorRateReport:
    metric: str
    value: float
    support: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"metric value must be >= 0, got {self.value}")


def edit_distance(reference: Sequence, hypothesis: Sequence) -> int:
    """Minimal substitutions + insertions + deletions between two sequences."""
    ref = list(reference)
    hyp = list(hypothesis)
    if not ref:
        return len(hyp)
    if not hyp:
        return len(ref)
    previous = list(range(len(hyp) + 1))
    for i, r in enumerate(ref, start=1):
        current = [i] + [0] * len(hyp)
        for j, h in enumerate(hyp, start=1):
            current[j] = min(
                previous[j] + 1,                      # deletion
                current[j - 1] + 1,                   # insertion
                previous[j - 1] + (r != h),           # substitution / match
            )
        previous = current
    return previous[-1]


def normalize_text(text: str) -> str:
    """Lowercase, strip ASCII punctuation, collapse runs of whitespace."""
    return " ".join(text.lower().translate(_PUNCT_TABLE).split())


def tokenize(text: str, unit: str) -> list[str]:
    normalized = normalize_text(text)
    if unit == "word":
        return normalized.split()
    if unit == "char":
        return list(normalized)
    raise ValueError(f"unit must be 'word' or 'char', got {unit!r}")


def wer(reference: str, hypothesis: str, unit: str = "word") -> float:
    """Edit distance over reference token count; may exceed 1.0.

    The word unit splits normalized text on whitespace; the char unit uses
    its characters including single spaces.
    """
    ref_tokens = tokenize(reference, unit)
    if not ref_tokens:
        raise MetricUndefinedError("reference is empty after normalization")
    hyp_tokens = tokenize(hypothesis, unit)
    return edit_distance(ref_tokens, hyp_tokens) / len(ref_tokens)


def cer(reference: str, hypothesis: str) -> float:
    return wer(reference, hypothesis, unit="char")


def _rates(scores: ScoreSet, threshold: float) -> tuple[float, float]:
    far = sum(s >= threshold for s in scores.impostor) / len(scores.impostor)
    frr = sum(s < threshold for s in scores.genuine) / len(scores.genuine)
    return far, frr


def eer(scores: ScoreSet) -> float:
    """Equal error rate of the genuine/impostor score sets.

    Sweeps thresholds over the union of observed scores (false acceptance:
    impostor >= t; false rejection: genuine < t). Returns the rate where
    the two curves meet, linearly interpolating between adjacent operating
    points when they never meet exactly. Order-based, hence exactly
    invariant under positive affine rescaling of all scores.
    """
    thresholds = sorted(set(scores.genuine) | set(scores.impostor))
    points = [_rates(scores, t) for t in thresholds]
    points.append((0.0, 1.0))  # virtual threshold above the maximum score
    for far, frr in points:
        if far == frr:
            return far
    for (far1, frr1), (far2, frr2) in zip(points, points[1:]):
        d1 = far1 - frr1
        d2 = far2 - frr2
        if d1 > 0 > d2:
            alpha = d1 / (d1 - d2)
            return far1 + alpha * (far2 - far1)
    raise AssertionError("threshold sweep found no crossing")  # unreachable: d1 spans +1..-1


def _utterances(entry) -> list[np.ndarray]:
    if isinstance(entry, np.ndarray):
        return [check_matrix(entry, "utterance")]
    return [check_matrix(u, "utterance") for u in entry]


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < ZERO_NORM_EPS or nb < ZERO_NORM_EPS:
        return 0.0
    return float(a @ b / (na * nb))


def verification_scores(converted_sets, real_sets, target: int) -> ScoreSet:
    """Mean-embedding cosine verifier for the target speaker.

    Each utterance is embedded as its column-mean vector; the target's
    enrollment embedding is the mean of its real utterance embeddings.
    Converted-to-target utterances form the genuine trials, real utterances
    of every other speaker the impostor trials.
    """
    per_speaker = [_utterances(entry) for entry in real_sets]
    if not 0 <= target < len(per_speaker):
        raise ValueError(f"target must index real_sets (0..{len(per_speaker) - 1}), got {target}")
    dims = {u.shape[1] for utts in per_speaker for u in utts}
    converted = [check_matrix(u, "converted utterance") for u in converted_sets]
    dims |= {u.shape[1] for u in converted}
    if len(dims) != 1:
        raise ValueError(f"all utterances must share the feature dimension, got {sorted(dims)}")

    enrollment = np.mean([u.mean(axis=0) for u in per_speaker[target]], axis=0)
    genuine = tuple(_cosine(u.mean(axis=0), enrollment) for u in converted)
    impostor = tuple(
        _cosine(u.mean(axis=0), enrollment)
        for speaker, utts in enumerate(per_speaker)
        if speaker != target
        for u in utts
    )
    return ScoreSet(genuine, impostor)


def write_scores_csv(scores: ScoreSet, path) -> None:
    lines = ["label,score"]
    lines += [f"genuine,{s!r}" for s in scores.genuine]
    lines += [f"impostor,{s!r}" for s in scores.impostor]
    lvcf.atomic_write_bytes(("\n".join(lines) + "\n").encode(), path)


def read_scores_csv(path) -> ScoreSet:
    genuine: list[float] = []
    impostor: list[float] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            label = row["label"].strip()
            if label == "genuine":
                genuine.append(float(row["score"]))
            elif label == "impostor":
                impostor.append(float(row["score"]))
            else:
                raise ValueError(f"score label must be genuine or impostor, got {label!r}")
    return ScoreSet(tuple(genuine), tuple(impostor))


def read_transcripts(path) -> dict[str, str]:
    """One utterance per line: ``<id><TAB><text>``."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{lineno}: expected '<id>\\t<text>'")
            utt_id, text = line.split("\t", 1)
            out[utt_id] = text
    return out


def corpus_error_rate(
    references: dict[str, str], hypotheses: dict[str, str], unit: str = "word"
) -> ErrorRateReport:
    """Corpus-level rate: total edits over total reference tokens."""
    missing = sorted(set(references) - set(hypotheses))
    if missing:
        raise ValueError(f"hypotheses missing for ids: {missing[:5]}")
    edits = 0
    tokens = 0
    for utt_id, ref in references.items():
        ref_tokens = tokenize(ref, unit)
        edits += edit_distance(ref_tokens, tokenize(hypotheses[utt_id], unit))
        tokens += len(ref_tokens)
    if tokens == 0:
        raise MetricUndefinedError("no reference tokens")
    return ErrorRateReport(metric="wer" if unit == "word" else "cer",
                           value=edits / tokens, support=tokens)
