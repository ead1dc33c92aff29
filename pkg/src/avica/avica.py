"""Degree-greedy power-project feature extraction.

Instead of one kernel matrix at a fixed degree, the fit walks degrees
``1..maxdeg``: the degree-``d`` matrix is the entrywise product of the
(projected) degree-``d-1`` matrix with the base matrix ``K = k(X, Y)``, and
after each thresholded SVD the matrix is replaced by its retained low-rank
part.  Features found below the threshold but above numerical zero enter the
generative registry at the degree they first appear, which keeps the
description of the data manifold sparse: relations already found at a lower
degree are projected away and do not reappear.

The per-degree threshold decays geometrically, ``epsilon_d = epsilon *
theta^d``, matching the ``theta^d`` scaling of the kernel itself; quanta are
reported on the same scale (``sigma * theta^d``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ipca import (
    SPECTRUM_FLOOR_RTOL,
    Feature,
    FeatureLabel,
    resolve_epsilon,
    sample_anchors,
)
from .kernels import KernelFamily, KernelSpec, as_point_matrix, kernel_matrix
from .tsvd import ThresholdedSvd, low_rank_project, thresholded_svd

# singular values below this fraction of the degree-1 spectrum top are
# treated as exact zeros and never emitted as generative features
MACHINE_ZERO_RTOL = 1e-12


@dataclass(frozen=True)
class DegreeLayer:
    """Stored split of the degree-``d`` matrix: retained / rejected triples."""

    degree: int
    S: np.ndarray
    V: np.ndarray
    S_perp: np.ndarray
    V_perp: np.ndarray
    epsilon_d: float
    generative_rows: np.ndarray  # rows of V_perp emitted as generative features

    @property
    def retained_rank(self) -> int:
        return self.S.shape[0]


@dataclass
class AvicaModel:
    spec: KernelSpec
    Y: np.ndarray
    layers: list[DegreeLayer]
    epsilon: float
    features: list[Feature]
    normalizer: float = 1.0
    rank_caps: dict[int, int] | None = None

    @property
    def maxdeg(self) -> int:
        return self.layers[-1].degree

    @property
    def discriminative_features(self) -> list[Feature]:
        return [f for f in self.features if f.label is FeatureLabel.DISCRIMINATIVE]

    @property
    def generative_features(self) -> list[Feature]:
        return [f for f in self.features if f.label is FeatureLabel.GENERATIVE]


def _validate_base_spec(spec: KernelSpec) -> None:
    if spec.family is KernelFamily.GAUSSIAN:
        return
    if spec.degree != 1:
        raise ValueError(
            "the power-project fit steps degrees itself; pass a degree-1 "
            f"polynomial kernel (got degree {spec.degree})"
        )


def _apply_rank_cap(t: ThresholdedSvd, cap: int | None) -> ThresholdedSvd:
    if cap is None or t.rank <= cap:
        return t
    return ThresholdedSvd(
        U=t.U[:, :cap],
        S=t.S[:cap],
        V=t.V[:cap],
        U_perp=np.hstack([t.U[:, cap:], t.U_perp]),
        S_perp=np.concatenate([t.S[cap:], t.S_perp]),
        V_perp=np.vstack([t.V[cap:], t.V_perp]),
        epsilon=t.epsilon,
    )


def build_feature_registry(layers: list[DegreeLayer], theta: float) -> list[Feature]:
    """Assemble the informativity-ordered registry from the stored layers.

    Generative features come first, ascending by quantum (the closer to
    exactly vanishing, the more structural information); discriminative ones
    follow, descending.  Ties break by (quantum, degree, source row).
    """
    generative: list[Feature] = []
    discriminative: list[Feature] = []
    for layer in layers:
        scale = theta**layer.degree
        for i in range(layer.S.size):
            discriminative.append(
                Feature(
                    alphas=layer.V[i],
                    degree=layer.degree,
                    label=FeatureLabel.DISCRIMINATIVE,
                    quantum=float(layer.S[i] * scale),
                    source_index=i,
                )
            )
        for i in layer.generative_rows:
            generative.append(
                Feature(
                    alphas=layer.V_perp[i],
                    degree=layer.degree,
                    label=FeatureLabel.GENERATIVE,
                    quantum=float(layer.S_perp[i] * scale),
                    source_index=int(i),
                )
            )
    generative.sort(key=lambda f: (f.quantum, f.degree, f.source_index))
    discriminative.sort(key=lambda f: (-f.quantum, f.degree, f.source_index))
    return generative + discriminative


def avica_fit(
    X,
    spec: KernelSpec,
    maxdeg: int,
    epsilon: float | str | None = None,
    n_anchors: int | None = None,
    seed: int = 0,
    anchors=None,
    rank_caps: dict[int, int] | None = None,
) -> AvicaModel:
    """Fit the degree-stepping model.

    ``spec`` must be a degree-1 polynomial kernel or a Gaussian one (whose
    entrywise powers play the role of the degrees).  ``anchors`` overrides
    random sampling; drawing them from a reference set instead of the
    ambient box is what turns the generative features into one-vs-rest
    discriminators.  ``rank_caps`` optionally caps the retained rank per
    degree, for when the dimension growth of the underlying variety is known.

    As in the one-shot fit, the base matrix is divided by ``sqrt(N)`` before
    powering, so thresholds and quanta live on the per-training-point scale
    at every degree and a fixed per-point noise estimate is a meaningful
    threshold regardless of sample size.
    """
    X = as_point_matrix(X, name="X")
    _validate_base_spec(spec)
    if maxdeg < 1:
        raise ValueError(f"maxdeg must be >= 1, got {maxdeg}")
    if isinstance(epsilon, (int, float)) and not epsilon > 0.0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")

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
    base_spectrum = np.linalg.svd(K, compute_uv=False)
    eps = resolve_epsilon(epsilon, base_spectrum)
    if epsilon == "logmean" and maxdeg > 1:
        # A walk past degree 1 must not threshold away the smallest real
        # degree-1 direction, or the entrywise powers can no longer reach
        # relations that only appear at higher degree.  Clamp the spectral
        # mean below the smallest resolvable degree-1 structure.
        floor = SPECTRUM_FLOOR_RTOL * float(base_spectrum[0])
        positive = base_spectrum[base_spectrum > floor]
        eps = min(eps, spec.theta * float(positive[-1]))
    if eps <= 0.0:
        raise ValueError("resolved epsilon must be > 0")
    zero_cutoff = MACHINE_ZERO_RTOL * float(base_spectrum[0]) if base_spectrum.size else 0.0

    layers: list[DegreeLayer] = []
    K_d = np.ones_like(K)
    eps_d = eps
    for d in range(1, maxdeg + 1):
        eps_d = eps_d * spec.theta
        K_d = K_d * K
        t = _apply_rank_cap(thresholded_svd(K_d, eps_d), (rank_caps or {}).get(d))
        gen_rows = np.flatnonzero(t.S_perp > zero_cutoff)
        layers.append(
            DegreeLayer(
                degree=d,
                S=t.S,
                V=t.V,
                S_perp=t.S_perp,
                V_perp=t.V_perp,
                epsilon_d=eps_d,
                generative_rows=gen_rows,
            )
        )
        K_d = low_rank_project(t)

    features = build_feature_registry(layers, spec.theta)
    return AvicaModel(
        spec=spec,
        Y=Y,
        layers=layers,
        epsilon=eps,
        features=features,
        normalizer=normalizer,
        rank_caps=rank_caps,
    )


def avica_eval(model: AvicaModel, X_new) -> list[tuple[np.ndarray, np.ndarray]]:
    """Bulk-evaluate all stored features on new points.

    Returns one ``(discriminative, generative)`` pair of matrices per degree,
    rows indexed by points.  Replays the fit's power-project recursion: after
    emitting the degree-``d`` values, the evaluation matrix is projected onto
    the span of the retained right vectors, exactly as during fitting, so on
    the training data the discriminative outputs reproduce ``U_d diag(S_d)``.
    """
    X_new = as_point_matrix(X_new, name="X_new", allow_empty=True)
    if X_new.shape[1] != model.Y.shape[1]:
        raise ValueError(
            f"dimension mismatch: points have {X_new.shape[1]} coordinates, "
            f"model expects {model.Y.shape[1]}"
        )
    K = kernel_matrix(model.spec, X_new, model.Y) / model.normalizer
    out: list[tuple[np.ndarray, np.ndarray]] = []
    K_d = np.ones_like(K)
    for layer in model.layers:
        K_d = K_d * K
        disc = K_d @ layer.V.T
        gen = K_d @ layer.V_perp[layer.generative_rows].T
        out.append((disc, gen))
        K_d = disc @ layer.V
    return out


def feature_count_profile(model: AvicaModel) -> list[tuple[int, int, int]]:
    """Per-degree counts ``(degree, n_discriminative, n_generative)``."""
    return [
        (layer.degree, layer.retained_rank, int(layer.generative_rows.size))
        for layer in model.layers
    ]


def evaluate_feature(model: AvicaModel, feature: Feature, X_new) -> np.ndarray:
    """Values of one registry feature at each point of ``X_new``."""
    per_degree = avica_eval(model, X_new)
    layer_index = next(
        i for i, layer in enumerate(model.layers) if layer.degree == feature.degree
    )
    disc, gen = per_degree[layer_index]
    if feature.label is FeatureLabel.DISCRIMINATIVE:
        return disc[:, feature.source_index]
    layer = model.layers[layer_index]
    col = int(np.searchsorted(layer.generative_rows, feature.source_index))
    return gen[:, col]
