"""Linear voice-conversion maps and the nearest-neighbour baseline.

The transform grid: a pure translation (bias only), an orthogonal map
(rotation/reflection, the Procrustes solution), and an unconstrained linear
map (least squares), each optionally with a bias term. ``LinearTransform``
follows the scikit-learn estimator protocol so fitted maps compose with
pipelines; ``KNNConverter`` wraps the frame-replacement baseline the same
way.
"""

from __future__ import annotations

import json
import os

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import lvcf
from .linalg import lstsq, svd
from .matching import gather_targets, match_frames
from .validation import check_matrix, check_same_cols, check_same_rows

KINDS = ("bias_only", "orthogonal", "unconstrained")

MAP_MANIFEST = "manifest.json"
DEFAULT_VIZ_PERCENTILE = 99.0


class LinearTransform(BaseEstimator, TransformerMixin):
    """A fitted linear map ``x -> x @ weight_ + bias_``.

    Parameters
    ----------
    kind : {'bias_only', 'orthogonal', 'unconstrained'}
        Constraint family. 'bias_only' keeps the weight at identity and only
        translates; 'orthogonal' restricts the weight to rotations and
        reflections (Procrustes solution); 'unconstrained' is plain least
        squares.
    with_bias : bool
        Fit a bias term. Ignored for 'bias_only', which is all bias.
    ridge : float
        Optional L2 penalty on the weight for 'unconstrained' fits; 0 keeps
        the plain least-squares objective.
    """

    def __init__(self, kind: str = "unconstrained", with_bias: bool = False, ridge: float = 0.0):
        self.kind = kind
        self.with_bias = with_bias
        self.ridge = ridge

    def fit(self, X, Y):
        """Fit the map minimizing ||Y - X @ W - b||_F over the chosen family."""
        x = check_matrix(X, "X")
        y = check_matrix(Y, "Y")
        check_same_rows(x, y, "X", "Y")
        check_same_cols(x, y, "X", "Y")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.ridge < 0:
            raise ValueError(f"ridge must be >= 0, got {self.ridge}")
        if self.ridge > 0 and self.kind != "unconstrained":
            raise ValueError("ridge is only meaningful for kind='unconstrained'")

        d = x.shape[1]
        if self.kind == "bias_only":
            weight = np.eye(d)
            bias = y.mean(axis=0) - x.mean(axis=0)
        elif self.kind == "orthogonal":
            if self.with_bias:
                x_mean = x.mean(axis=0)
                y_mean = y.mean(axis=0)
                weight = _procrustes(x - x_mean, y - y_mean)
                bias = y_mean - x_mean @ weight
            else:
                weight = _procrustes(x, y)
                bias = np.zeros(d)
        else:
            if self.with_bias:
                augmented = np.hstack([x, np.ones((x.shape[0], 1))])
                solution = _ridge_lstsq(augmented, y, self.ridge)
                weight = solution[:d]
                bias = solution[d]
            else:
                weight = _ridge_lstsq(x, y, self.ridge)
                bias = np.zeros(d)

        self.weight_ = weight
        self.bias_ = bias
        self.fitted_dim_ = d
        return self

    def transform(self, X):
        """Apply the fitted map: ``X @ weight_ + bias_``."""
        self._check_fitted()
        x = check_matrix(X, "X")
        if x.shape[1] != self.fitted_dim_:
            raise ValueError(
                f"X has {x.shape[1]} columns but the map was fitted on {self.fitted_dim_}"
            )
        return x @ self.weight_ + self.bias_

    def save(self, directory) -> None:
        """Serialize: weight.lvcf, bias.lvcf (1 x D) and a manifest sidecar."""
        self._check_fitted()
        os.makedirs(directory, exist_ok=True)
        lvcf.write_matrix(self.weight_, os.path.join(directory, "weight.lvcf"))
        lvcf.write_matrix(self.bias_.reshape(1, -1), os.path.join(directory, "bias.lvcf"))
        manifest = {"kind": self.kind, "fitted_dim": int(self.fitted_dim_)}
        raw = json.dumps(manifest, sort_keys=True, indent=2).encode() + b"\n"
        lvcf.atomic_write_bytes(raw, os.path.join(directory, MAP_MANIFEST))

    @classmethod
    def load(cls, directory) -> "LinearTransform":
        with open(os.path.join(directory, MAP_MANIFEST), encoding="utf-8") as fh:
            manifest = json.load(fh)
        kind = manifest["kind"]
        if kind not in KINDS:
            raise ValueError(f"manifest kind {kind!r} is not one of {KINDS}")
        weight = lvcf.read_matrix(os.path.join(directory, "weight.lvcf"))
        bias = lvcf.read_matrix(os.path.join(directory, "bias.lvcf"))[0]
        d = int(manifest["fitted_dim"])
        if weight.shape != (d, d) or bias.shape != (d,):
            raise ValueError(
                f"stored shapes {weight.shape}/{bias.shape} do not match fitted_dim {d}"
            )
        est = cls(kind=kind, with_bias=bool(np.any(bias != 0.0)))
        est.weight_ = weight
        est.bias_ = bias
        est.fitted_dim_ = d
        return est

    def _check_fitted(self):
        if not hasattr(self, "weight_"):
            raise NotFittedError("this LinearTransform has not been fitted")


def _procrustes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Orthogonal W minimizing ||y - x @ W||_F (SVD of the cross-covariance).

    When x.T @ y has repeated or zero singular values the minimizer is not
    unique; the U @ Vt of the computed SVD is returned deterministically.
    """
    result = svd(x.T @ y)
    return result.u @ result.vt


def _ridge_lstsq(x: np.ndarray, y: np.ndarray, ridge: float) -> np.ndarray:
    if ridge == 0.0:
        return lstsq(x, y)
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    shrunk = s / (s**2 + ridge)
    return (vt.T * shrunk) @ (u.T @ y)


class KNNConverter(BaseEstimator, TransformerMixin):
    """Frame-replacement baseline: each frame becomes the mean of its k
    nearest reference frames under cosine distance."""

    def __init__(self, k: int = 4):
        self.k = k

    def fit(self, X, y=None):
        """Store the reference frame pool."""
        self.pool_ = check_matrix(X, "X")
        return self

    def transform(self, X):
        if not hasattr(self, "pool_"):
            raise NotFittedError("this KNNConverter has not been fitted")
        return knn_convert(X, self.pool_, self.k)


def knn_convert(source, target_pool, k: int = 4) -> np.ndarray:
    """Replace each source frame with the mean of its k nearest pool frames."""
    pairs = match_frames(source, target_pool, k)
    return gather_targets(pairs, target_pool, k)


def export_viz(tmap: LinearTransform, threshold: float | None = None, max_dims: int = 256) -> np.ndarray:
    """Threshold and binarize the weight matrix for visual inspection.

    Pixel (i, j) of the max_dims x max_dims boolean image is set iff
    ``|weight[i, j]| >= threshold`` over the leading max_dims rows/columns.
    The default threshold is the 99th percentile of all |weight| entries, so
    it adapts to the map's scale.
    """
    tmap._check_fitted()
    magnitude = np.abs(tmap.weight_)
    if threshold is None:
        threshold = float(np.percentile(magnitude, DEFAULT_VIZ_PERCENTILE))
    if np.isnan(threshold):
        raise ValueError("threshold must not be NaN")
    if not 0 < max_dims <= tmap.fitted_dim_:
        raise ValueError(f"max_dims must be in [1, {tmap.fitted_dim_}], got {max_dims}")
    return magnitude[:max_dims, :max_dims] >= threshold


def write_pgm(image: np.ndarray, path) -> None:
    """Write a boolean image as a binary PGM (P5, maxval 255, set pixel = 255)."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError(f"image must be 2-D, got ndim={img.ndim}")
    height, width = img.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    data = np.where(img, np.uint8(255), np.uint8(0)).tobytes()
    lvcf.atomic_write_bytes(header + data, path)
