"""One-vs-all classification through class-wise manifold features.

Each class gets its own degree-stepping fit, but with a twist: the anchor
points are drawn from the union of all classes rather than from the ambient
box.  A feature that nearly vanishes on one class but is built from anchors
spread over every class separates that class from the rest - the
manifold-describing features double as class discriminators.  A point is
assigned to the class whose generative feature values have the smallest
l1-norm there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .avica import AvicaModel, avica_eval, avica_fit
from .kernels import KernelSpec, as_point, as_point_matrix

DEFAULT_ANCHOR_CAP = 200


@dataclass(frozen=True)
class LabeledDataset:
    """Points with integer class labels; every class must be non-empty."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        points = as_point_matrix(self.points, name="points")
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != points.shape[0]:
            raise ValueError(
                f"need one label per point: {labels.shape} labels for {points.shape[0]} points"
            )
        if labels.size and not np.all(labels == labels.astype(int)):
            raise ValueError("labels must be integers")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels.astype(int))

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)


@dataclass
class OneVsAllModel:
    spec: KernelSpec
    maxdeg: int
    epsilon: float | str
    anchors: np.ndarray
    class_models: dict[int, AvicaModel]

    @property
    def classes(self) -> list[int]:
        return sorted(self.class_models)


def train_one_vs_all(
    data: LabeledDataset,
    spec: KernelSpec,
    maxdeg: int,
    epsilon: float | str = "logmean",
    seed: int = 0,
    anchor_cap: int = DEFAULT_ANCHOR_CAP,
) -> OneVsAllModel:
    """Fit one generative model per class against a shared anchor pool.

    The pool is a subsample (without replacement, at most ``anchor_cap``
    points) of the union of all classes.  ``epsilon`` may be a number or
    ``"logmean"``, in which case each class's threshold is the geometric
    mean of its own degree-1 spectrum.
    """
    classes = data.classes
    if classes.size < 2:
        raise ValueError(f"need at least two classes, got {classes.size}")
    counts = {int(c): int(np.sum(data.labels == c)) for c in classes}
    if min(counts.values()) < 1:
        raise ValueError("every class must be non-empty")

    rng = np.random.default_rng(seed)
    n_total = data.points.shape[0]
    pool_size = min(n_total, anchor_cap)
    pool_idx = rng.choice(n_total, size=pool_size, replace=False)
    anchors = data.points[np.sort(pool_idx)]

    class_models: dict[int, AvicaModel] = {}
    for c in classes:
        X_c = data.points[data.labels == c]
        class_models[int(c)] = avica_fit(
            X_c, spec, maxdeg=maxdeg, epsilon=epsilon, anchors=anchors
        )
    return OneVsAllModel(
        spec=spec,
        maxdeg=maxdeg,
        epsilon=epsilon,
        anchors=anchors,
        class_models=class_models,
    )


def generative_l1_norms(model: OneVsAllModel, X) -> np.ndarray:
    """l1-norm of each class's generative feature values at each point.

    Shape ``(n_points, n_classes)``, columns ordered by ascending class id.
    A class without generative features gets ``+inf`` in its column.
    """
    X = as_point_matrix(X, name="X", allow_empty=True)
    columns = []
    for c in model.classes:
        cm = model.class_models[c]
        if not cm.generative_features:
            columns.append(np.full(X.shape[0], np.inf))
            continue
        per_degree = avica_eval(cm, X)
        gen_blocks = [gen for _, gen in per_degree if gen.shape[1]]
        values = np.hstack(gen_blocks) if gen_blocks else np.zeros((X.shape[0], 0))
        columns.append(np.sum(np.abs(values), axis=1))
    return np.column_stack(columns)


def classify_batch(model: OneVsAllModel, X) -> np.ndarray:
    """Predicted class ids, the argmin of the per-class generative l1-norms.

    Ties break toward the lowest class id.  Raises if no class learned any
    generative feature (nothing to compare; lower epsilon).
    """
    norms = generative_l1_norms(model, X)
    if norms.shape[0] and not np.all(np.isfinite(np.min(norms, axis=1))):
        raise ValueError("no generative features learned, lower epsilon")
    classes = np.asarray(model.classes)
    return classes[np.argmin(norms, axis=1)]


def classify(model: OneVsAllModel, x) -> int:
    x = as_point(x, name="x")
    return int(classify_batch(model, x[np.newaxis, :])[0])


def evaluate_accuracy(model: OneVsAllModel, test: LabeledDataset) -> float:
    """Fraction of correctly classified test points."""
    predicted = classify_batch(model, test.points)
    return float(np.mean(predicted == test.labels))
