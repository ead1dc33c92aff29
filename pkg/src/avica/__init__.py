"""Kernel feature extraction with a generative/discriminative split.

Two fitting strategies over rectangular kernel matrices ``k(data, anchors)``:
a one-shot SVD at a fixed kernel degree (:func:`ipca_fit`) and a
degree-greedy power-project walk (:func:`avica_fit`).  In both, singular
directions above a threshold are discriminative features spanning an
interpolation space for the data, and the ones below nearly vanish on the
data manifold and describe it.  A symbolic polynomial-ring companion
(:mod:`avica.polyring`) provides exact small-scale ground truth for testing,
and :mod:`avica.dataio` covers synthetic data, persistence, and level-set
export.
"""

from .avica import (
    AvicaModel,
    DegreeLayer,
    avica_eval,
    avica_fit,
    evaluate_feature,
    feature_count_profile,
)
from .classifier import (
    LabeledDataset,
    OneVsAllModel,
    classify,
    classify_batch,
    evaluate_accuracy,
    generative_l1_norms,
    train_one_vs_all,
)
from .dataio import (
    Blobs,
    Circle,
    LevelSetGrid,
    Line,
    ModelCorruptError,
    ModelIOError,
    ModelSchemaError,
    ModelVersionError,
    SyntheticSpec,
    UnionOfCircles,
    circle_threshold,
    generate,
    level_set_grid,
    load_model,
    read_csv_points,
    save_model,
    write_level_set_csv,
    write_points_csv,
)
from .ipca import Feature, FeatureLabel, IpcaModel, ipca_eval, ipca_fit, sample_anchors
from .kernels import (
    DEFAULT_THETA,
    KernelFamily,
    KernelSpec,
    hadamard_step,
    kernel_eval,
    kernel_matrix,
)
from .tsvd import ThresholdedSvd, low_rank_project, thresholded_svd

__all__ = [
    "AvicaModel",
    "Blobs",
    "Circle",
    "DEFAULT_THETA",
    "DegreeLayer",
    "Feature",
    "FeatureLabel",
    "IpcaModel",
    "KernelFamily",
    "KernelSpec",
    "LabeledDataset",
    "LevelSetGrid",
    "Line",
    "ModelCorruptError",
    "ModelIOError",
    "ModelSchemaError",
    "ModelVersionError",
    "OneVsAllModel",
    "SyntheticSpec",
    "ThresholdedSvd",
    "UnionOfCircles",
    "avica_eval",
    "avica_fit",
    "circle_threshold",
    "classify",
    "classify_batch",
    "evaluate_accuracy",
    "evaluate_feature",
    "feature_count_profile",
    "generate",
    "generative_l1_norms",
    "hadamard_step",
    "ipca_eval",
    "ipca_fit",
    "kernel_eval",
    "kernel_matrix",
    "level_set_grid",
    "load_model",
    "low_rank_project",
    "read_csv_points",
    "sample_anchors",
    "save_model",
    "thresholded_svd",
    "train_one_vs_all",
    "write_level_set_csv",
    "write_points_csv",
]

__version__ = "0.1.0"
