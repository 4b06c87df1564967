"""Synthetic multi-speaker corpora with a planted shared content subspace.

Content is modeled as Gaussian class clusters in a low-dimensional space
(standing in for phone classes); each speaker embeds the same content
points into the ambient feature space through its own linear map plus an
optional bias and additive noise. Because the planted geometry is known
exactly, conversion quality can be scored without any speech models: a
label-based accuracy proxies intelligibility and a mean-embedding cosine
proxies speaker similarity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .validation import check_matrix

WITHIN_CLASS_SPREAD = 0.1   # cluster radius around each content class centroid
AFFINE_SHEAR = 0.25         # off-orthogonality of affine-family embeddings
AFFINE_BIAS_SCALE = 1.0
ZERO_MEAN_EPS = 1e-12

FAMILIES = ("orthogonal", "affine")


@dataclass(frozen=True)
class SynthSpec:
    """Generation parameters. Defaults are the desk-scale configuration
    (runs in seconds while leaving clear rank/class structure)."""

    n_frames: int = 2000
    d: int = 64
    r_true: int = 8
    k_speakers: int = 4
    n_content_classes: int = 20
    noise_sigma: float = 0.01
    transform_family: str = "orthogonal"
    seed: int = 17

    def validate(self) -> None:
        if self.r_true > self.d:
            raise ValueError(f"r_true ({self.r_true}) must not exceed d ({self.d})")
        if self.r_true < 1 or self.d < 1 or self.n_frames < 1 or self.k_speakers < 1:
            raise ValueError("n_frames, d, r_true and k_speakers must be positive")
        if self.n_content_classes < 2:
            raise ValueError(f"need at least 2 content classes, got {self.n_content_classes}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.transform_family not in FAMILIES:
            raise ValueError(f"transform_family must be one of {FAMILIES}")


@dataclass(frozen=True)
class SynthTruth:
    """Planted ground truth for a generated dataset."""

    content_points: np.ndarray                 # (N, r_true) shared across speakers
    content_labels: np.ndarray                 # (N,) int class labels
    speaker_transforms: tuple[np.ndarray, ...]  # K maps, each (r_true, d)
    speaker_biases: tuple[np.ndarray, ...]      # K vectors, each (d,)

    @property
    def n_classes(self) -> int:
        return int(self.content_labels.max()) + 1

    def target_frames(self, speaker: int) -> np.ndarray:
        """Noiseless frames the given speaker would emit for the content."""
        return self.content_points @ self.speaker_transforms[speaker] + self.speaker_biases[speaker]

    def class_means(self) -> np.ndarray:
        """Per-class empirical centroids of the content points."""
        classes = self.n_classes
        means = np.zeros((classes, self.content_points.shape[1]))
        for c in range(classes):
            rows = self.content_labels == c
            if rows.any():
                means[c] = self.content_points[rows].mean(axis=0)
        return means

    def select(self, rows) -> "SynthTruth":
        """Restrict the truth to a subset of frames (e.g. one utterance)."""
        rows = np.asarray(rows)
        return replace(
            self,
            content_points=self.content_points[rows],
            content_labels=self.content_labels[rows],
        )


def _orthonormal_rows(rng: np.random.Generator, r: int, d: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((d, r)))
    return q[:, :r].T


def generate(spec: SynthSpec) -> tuple[list[np.ndarray], SynthTruth]:
    """Generate one feature matrix per speaker plus the planted truth.

    Deterministic given the seed; per-speaker streams are split off a
    counter-based generator so speakers could be drawn in parallel without
    changing the output.
    """
    spec.validate()
    streams = np.random.SeedSequence(spec.seed).spawn(spec.k_speakers + 1)
    rng = np.random.Generator(np.random.Philox(streams[0]))

    centroids = rng.standard_normal((spec.n_content_classes, spec.r_true))
    labels = rng.integers(0, spec.n_content_classes, size=spec.n_frames)
    points = centroids[labels] + WITHIN_CLASS_SPREAD * rng.standard_normal(
        (spec.n_frames, spec.r_true)
    )

    mats: list[np.ndarray] = []
    transforms: list[np.ndarray] = []
    biases: list[np.ndarray] = []
    for k in range(spec.k_speakers):
        rng_k = np.random.Generator(np.random.Philox(streams[k + 1]))
        basis = _orthonormal_rows(rng_k, spec.r_true, spec.d)
        if spec.transform_family == "orthogonal":
            transform = basis
            bias = np.zeros(spec.d)
        else:
            shear = np.eye(spec.r_true) + AFFINE_SHEAR * rng_k.standard_normal(
                (spec.r_true, spec.r_true)
            ) / np.sqrt(spec.r_true)
            transform = shear @ basis
            bias = AFFINE_BIAS_SCALE * rng_k.standard_normal(spec.d)
        frames = points @ transform + bias
        if spec.noise_sigma > 0:
            frames = frames + spec.noise_sigma * rng_k.standard_normal(frames.shape)
        mats.append(frames)
        transforms.append(transform)
        biases.append(bias)

    truth = SynthTruth(points, labels, tuple(transforms), tuple(biases))
    return mats, truth


def content_accuracy(converted, truth: SynthTruth, target_speaker: int) -> float:
    """Fraction of frames landing nearest their own class centroid in the
    target speaker's space. Proxies intelligibility: content survived the
    conversion iff the frame is still classified correctly."""
    conv = check_matrix(converted, "converted")
    if conv.shape[0] != truth.content_labels.shape[0]:
        raise ValueError(
            f"converted has {conv.shape[0]} rows for {truth.content_labels.shape[0]} labels"
        )
    transform = truth.speaker_transforms[target_speaker]
    if conv.shape[1] != transform.shape[1]:
        raise ValueError(
            f"converted has {conv.shape[1]} columns, expected {transform.shape[1]}"
        )
    centroids = truth.class_means() @ transform + truth.speaker_biases[target_speaker]
    # squared Euclidean distance to every class centroid
    d2 = (conv**2).sum(axis=1, keepdims=True) - 2.0 * conv @ centroids.T + (
        centroids**2
    ).sum(axis=1)
    predicted = d2.argmin(axis=1)
    return float(np.mean(predicted == truth.content_labels))


def speaker_score(converted, truth: SynthTruth, target_speaker: int) -> float:
    """Cosine between the converted mean frame and the target speaker's
    ground-truth mean frame for the same content; 0 when either mean is
    degenerate (zero)."""
    conv = check_matrix(converted, "converted")
    reference = truth.target_frames(target_speaker)
    if conv.shape != reference.shape:
        raise ValueError(f"converted shape {conv.shape} != reference shape {reference.shape}")
    a = conv.mean(axis=0)
    b = reference.mean(axis=0)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < ZERO_MEAN_EPS or nb < ZERO_MEAN_EPS:
        return 0.0
    return float(a @ b / (na * nb))


def split_rows(spec: SynthSpec, fraction: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic train/eval row split used by the evaluation harnesses."""
    cut = int(spec.n_frames * fraction)
    return np.arange(cut), np.arange(cut, spec.n_frames)


def class_utterances(truth: SynthTruth, rows: Sequence[int], min_frames: int = 3):
    """Group rows by content class into utterance-like subsets.

    Short utterances cover only part of the content distribution; grouping
    held-out frames by class mimics that skew, which is what makes
    mean-embedding speaker scores sensitive to a transform's failure to
    move content between speaker subspaces.
    """
    rows = np.asarray(rows)
    for c in range(truth.n_classes):
        utterance = rows[truth.content_labels[rows] == c]
        if len(utterance) >= min_frames:
            yield utterance
