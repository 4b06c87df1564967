"""Linear voice conversion on speech feature matrices.

Learns linear maps between speakers' frame-level feature matrices (paired
by cosine nearest neighbours), factorizes multiple speakers into a shared
low-rank content space with per-speaker transforms, and evaluates
conversions with planted synthetic oracles and objective metrics.
"""

from .factorization import (
    ContentFactorization,
    SpeakerFactorization,
    assemble_block,
    convert,
    factorize,
    load_factorization,
    rank_sweep,
    save_factorization,
    sweep_to_csv,
)
from .linalg import SvdResult, lstsq, pinv, svd
from .lvcf import (
    LvcfError,
    LvcfFormatError,
    LvcfLengthError,
    read_matrix,
    write_matrix,
)
from .matching import MatchedPairs, cosine_distance, gather_targets, match_frames
from .metrics import (
    ErrorRateReport,
    MetricUndefinedError,
    ScoreSet,
    cer,
    edit_distance,
    eer,
    verification_scores,
    wer,
)
from .synth import SynthSpec, SynthTruth, content_accuracy, generate, speaker_score
from .transforms import KNNConverter, LinearTransform, export_viz, knn_convert, write_pgm

__version__ = "0.1.0"

__all__ = [
    "ContentFactorization",
    "ErrorRateReport",
    "KNNConverter",
    "LinearTransform",
    "LvcfError",
    "LvcfFormatError",
    "LvcfLengthError",
    "MatchedPairs",
    "MetricUndefinedError",
    "ScoreSet",
    "SpeakerFactorization",
    "SvdResult",
    "SynthSpec",
    "SynthTruth",
    "assemble_block",
    "cer",
    "content_accuracy",
    "convert",
    "cosine_distance",
    "edit_distance",
    "eer",
    "export_viz",
    "factorize",
    "gather_targets",
    "generate",
    "knn_convert",
    "load_factorization",
    "lstsq",
    "match_frames",
    "pinv",
    "rank_sweep",
    "read_matrix",
    "save_factorization",
    "speaker_score",
    "svd",
    "sweep_to_csv",
    "verification_scores",
    "wer",
    "write_matrix",
    "write_pgm",
]
