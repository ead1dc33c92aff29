"""One-shot extraction of discriminative and generative kernel features.

Fit: sample ``D`` random anchor points ``Y``, form the kernel matrix
``K = k(X, Y)``, take its SVD, and label each right singular vector by its
singular value against a threshold: at or above the threshold the feature is
"discriminative" (it varies on the data and spans an interpolation space for
it), below it is "generative" (it nearly vanishes on the data and describes
the underlying manifold).  Every feature is a function
``F(.) = sum_j alpha_j k(y_j, .)``, so bulk evaluation is one kernel matrix
times the stacked coefficient rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .kernels import KernelSpec, as_point_matrix, kernel_matrix
from .tsvd import thresholded_svd

DEFAULT_EPSILON_RTOL = 1e-6
SPECTRUM_FLOOR_RTOL = 1e-12


class FeatureLabel(Enum):
    DISCRIMINATIVE = "discriminative"
    GENERATIVE = "generative"


@dataclass(frozen=True)
class Feature:
    """One learned feature ``F(.) = sum_j alphas[j] * k^degree(y_j, .)``.

    ``quantum`` is the informativity weight: the singular value for the
    one-shot fit, the singular value scaled by ``theta^degree`` for the
    degree-stepping fit.  ``source_index`` is the row of ``alphas`` within
    the right-singular-vector block the feature was read from.
    """

    alphas: np.ndarray
    degree: int
    label: FeatureLabel
    quantum: float
    source_index: int

    def __post_init__(self) -> None:
        if not (self.quantum >= 0.0):
            raise ValueError(f"quantum must be >= 0, got {self.quantum}")


@dataclass
class IpcaModel:
    spec: KernelSpec
    Y: np.ndarray
    features: list[Feature]
    epsilon: float
    normalizer: float = 1.0

    @property
    def discriminative_features(self) -> list[Feature]:
        return [f for f in self.features if f.label is FeatureLabel.DISCRIMINATIVE]

    @property
    def generative_features(self) -> list[Feature]:
        return [f for f in self.features if f.label is FeatureLabel.GENERATIVE]


def sample_anchors(X: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw anchor points uniformly from the data bounding box inflated by 50%.

    Anchoring to the data scale keeps kernel values well conditioned; axes of
    zero extent get a unit box.  Callers needing a different distribution can
    pass explicit anchors to the fit functions instead.
    """
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    span = hi - lo
    pad = np.where(span == 0.0, 0.5, 0.25 * span)
    return rng.uniform(lo - pad, hi + pad, size=(count, X.shape[1]))


def resolve_epsilon(epsilon, singular_values: np.ndarray) -> float:
    """Turn an epsilon policy into a number.

    ``None`` means a small multiple of the largest singular value;
    ``"logmean"`` is the geometric mean of the (numerically nonzero)
    spectrum; a number is used as given.
    """
    if epsilon is None:
        return DEFAULT_EPSILON_RTOL * float(singular_values[0]) if singular_values.size else 0.0
    if isinstance(epsilon, str):
        if epsilon != "logmean":
            raise ValueError(f"unknown epsilon rule: {epsilon!r}")
        if singular_values.size == 0:
            raise ValueError("cannot take a log-mean of an empty spectrum")
        floor = SPECTRUM_FLOOR_RTOL * float(singular_values[0])
        positive = singular_values[singular_values > floor]
        if positive.size == 0:
            raise ValueError("spectrum is numerically zero; cannot apply logmean rule")
        return float(np.exp(np.mean(np.log(positive))))
    eps = float(epsilon)
    if eps < 0.0:
        raise ValueError(f"epsilon must be >= 0, got {eps}")
    return eps


def ipca_fit(
    X,
    spec: KernelSpec,
    n_anchors: int | None = None,
    epsilon: float | str | None = None,
    seed: int = 0,
    anchors=None,
) -> IpcaModel:
    """Fit the one-shot model.

    ``n_anchors`` defaults to the number of data points, the usual
    sufficiently-large choice.  All features (including exact numerical
    zeros) are kept, ordered by descending singular value.

    Thresholds, quanta, and feature values are expressed on the
    per-training-point scale: the kernel matrix is divided by ``sqrt(N)``
    before decomposition, so a feature's quantum is the root-mean-square of
    its values over the training points.  Fixed threshold policies (such as
    an expected per-point noise magnitude in feature space) then carry over
    unchanged between sample sizes.
    """
    X = as_point_matrix(X, name="X")
    if anchors is not None:
        Y = as_point_matrix(anchors, name="anchors")
        if Y.shape[1] != X.shape[1]:
            raise ValueError("anchors do not match the data dimension")
    else:
        if n_anchors is None:
            n_anchors = X.shape[0]
        if n_anchors < 1:
            raise ValueError(f"n_anchors must be >= 1, got {n_anchors}")
        rng = np.random.default_rng(seed)
        Y = sample_anchors(X, n_anchors, rng)

    normalizer = float(np.sqrt(X.shape[0]))
    K = kernel_matrix(spec, X, Y) / normalizer
    # threshold at zero: one full signed SVD, every triple retained
    t = thresholded_svd(K, 0.0)
    eps = resolve_epsilon(epsilon, t.S)
    features = [
        Feature(
            alphas=t.V[i].copy(),
            degree=spec.degree,
            label=FeatureLabel.DISCRIMINATIVE if t.S[i] >= eps else FeatureLabel.GENERATIVE,
            quantum=float(t.S[i]),
            source_index=i,
        )
        for i in range(t.S.size)
    ]
    return IpcaModel(spec=spec, Y=Y, features=features, epsilon=eps, normalizer=normalizer)


def ipca_eval(model: IpcaModel, X_new) -> np.ndarray:
    """Evaluate every feature at every point: entry ``(k, i) = F_i(x_k)``.

    Columns follow the model's feature order (descending singular value).
    """
    X_new = as_point_matrix(X_new, name="X_new", allow_empty=True)
    if X_new.shape[1] != model.Y.shape[1]:
        raise ValueError(
            f"dimension mismatch: points have {X_new.shape[1]} coordinates, "
            f"model expects {model.Y.shape[1]}"
        )
    K = kernel_matrix(model.spec, X_new, model.Y) / model.normalizer
    V = np.vstack([f.alphas for f in model.features])
    return K @ V.T
