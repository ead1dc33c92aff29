"""Synthetic manifold samples, CSV ingestion, model persistence, level-set grids.

Persistence uses a self-describing, versioned JSON container in which every
float is written in base-10 scientific notation with 17 significant digits.
That many digits round-trip IEEE double exactly, so a saved model evaluates
bit-for-bit identically after reloading.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .avica import AvicaModel, DegreeLayer, build_feature_registry, evaluate_feature
from .classifier import LabeledDataset, OneVsAllModel
from .ipca import Feature, FeatureLabel, IpcaModel
from .kernels import KernelFamily, KernelSpec, as_point_matrix

FORMAT_NAME = "kernel-feature-model"
FORMAT_VERSION = 1


class ModelIOError(Exception):
    """Base class for model persistence failures."""


class ModelVersionError(ModelIOError):
    """The file declares a format version this code does not understand."""


class ModelCorruptError(ModelIOError):
    """The file is not a parsable model container."""


class ModelSchemaError(ModelIOError):
    """The container parses but violates the model schema or its invariants."""


# ---------------------------------------------------------------------------
# synthetic data


@dataclass(frozen=True)
class Circle:
    radius: float

    def __post_init__(self) -> None:
        if not (self.radius > 0):
            raise ValueError(f"radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class Line:
    """Points ``offset + t * direction`` with ``t`` uniform on [-1, 1]."""

    direction: tuple[float, ...]
    offset: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.direction) != len(self.offset):
            raise ValueError("direction and offset must have the same dimension")
        if not any(d != 0 for d in self.direction):
            raise ValueError("direction must be non-zero")


@dataclass(frozen=True)
class UnionOfCircles:
    radii: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.radii or any(r <= 0 for r in self.radii):
            raise ValueError("all radii must be > 0")


@dataclass(frozen=True)
class Blobs:
    """Isotropic Gaussian clusters, one per center."""

    centers: tuple[tuple[float, ...], ...]
    spreads: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.centers:
            raise ValueError("need at least one center")
        if len(self.spreads) != len(self.centers):
            raise ValueError("need one spread per center")
        if any(s <= 0 for s in self.spreads):
            raise ValueError("spreads must be > 0")


Shape = Circle | Line | UnionOfCircles | Blobs


@dataclass(frozen=True)
class SyntheticSpec:
    """What to sample.  ``count`` is per component for multi-component shapes."""

    shape: Shape
    count: int
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


def _circle_sample(radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    angles = rng.uniform(0.0, 2.0 * np.pi, count)
    return radius * np.column_stack([np.cos(angles), np.sin(angles)])


def generate(spec: SyntheticSpec) -> tuple[np.ndarray, np.ndarray | None]:
    """Sample clean manifold points plus per-coordinate Gaussian noise.

    Returns ``(points, labels)``; ``labels`` is None for single-component
    shapes and an integer component index otherwise.  Deterministic in
    ``spec.seed``.
    """
    rng = np.random.default_rng(spec.seed)
    shape = spec.shape
    labels: np.ndarray | None = None
    if isinstance(shape, Circle):
        points = _circle_sample(shape.radius, spec.count, rng)
    elif isinstance(shape, Line):
        t = rng.uniform(-1.0, 1.0, spec.count)
        direction = np.asarray(shape.direction, dtype=float)
        offset = np.asarray(shape.offset, dtype=float)
        points = offset + t[:, np.newaxis] * direction
    elif isinstance(shape, UnionOfCircles):
        parts = [_circle_sample(r, spec.count, rng) for r in shape.radii]
        points = np.vstack(parts)
        labels = np.repeat(np.arange(len(shape.radii)), spec.count)
    elif isinstance(shape, Blobs):
        dim = len(shape.centers[0])
        parts = [
            np.asarray(c, dtype=float) + s * rng.standard_normal((spec.count, dim))
            for c, s in zip(shape.centers, shape.spreads)
        ]
        points = np.vstack(parts)
        labels = np.repeat(np.arange(len(shape.centers)), spec.count)
    else:
        raise TypeError(f"unknown shape: {shape!r}")
    if spec.noise_sigma > 0:
        points = points + rng.normal(0.0, spec.noise_sigma, points.shape)
    return points, labels


def circle_threshold(theta: float, noise_sigma: float) -> float:
    """Expected per-point noise magnitude in feature space: ``2 theta sqrt(2) sigma^2``."""
    return 2.0 * theta * math.sqrt(2.0) * noise_sigma**2


# ---------------------------------------------------------------------------
# level-set grids


@dataclass(frozen=True)
class LevelSetGrid:
    """A generative feature evaluated on a rectangular grid.

    ``values[i, j]`` is the feature at ``(x[i], y[j])``.  ``quantum`` is the
    feature's informativity weight ``s``; the plotted region is the
    ``[-s/10, s/10]`` level set.
    """

    x_range: tuple[float, float, int]
    y_range: tuple[float, float, int]
    values: np.ndarray
    quantum: float

    @property
    def band(self) -> tuple[float, float]:
        return (-self.quantum / 10.0, self.quantum / 10.0)

    @property
    def x(self) -> np.ndarray:
        lo, hi, steps = self.x_range
        return np.linspace(lo, hi, steps)

    @property
    def y(self) -> np.ndarray:
        lo, hi, steps = self.y_range
        return np.linspace(lo, hi, steps)


def level_set_grid(
    model: AvicaModel,
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    steps: int | tuple[int, int],
) -> LevelSetGrid:
    """Evaluate the smallest-quantum generative feature on a 2-D grid.

    That feature is the most nearly vanishing description of the data
    manifold, so its near-zero band traces the manifold estimate.
    """
    if model.Y.shape[1] != 2:
        raise ValueError("level-set grids require a 2-dimensional ambient space")
    gens = model.generative_features
    if not gens:
        raise ValueError("model has no generative features, lower epsilon")
    feature = gens[0]  # informativity order puts the smallest quantum first

    sx, sy = (steps, steps) if isinstance(steps, int) else steps
    if sx < 2 or sy < 2:
        raise ValueError(f"steps must be >= 2 per axis, got {(sx, sy)}")
    xs = np.linspace(x_range[0], x_range[1], sx)
    ys = np.linspace(y_range[0], y_range[1], sy)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    points = np.column_stack([gx.ravel(), gy.ravel()])
    values = evaluate_feature(model, feature, points).reshape(sx, sy)
    return LevelSetGrid(
        x_range=(float(x_range[0]), float(x_range[1]), sx),
        y_range=(float(y_range[0]), float(y_range[1]), sy),
        values=values,
        quantum=feature.quantum,
    )


def write_level_set_csv(grid: LevelSetGrid, path) -> None:
    """Long-format export: metadata header lines, then ``x,y,value`` rows."""
    with open(path, "w") as fh:
        fh.write("# level-set grid\n")
        fh.write(
            f"# xmin={grid.x_range[0]!r} xmax={grid.x_range[1]!r} xsteps={grid.x_range[2]}\n"
        )
        fh.write(
            f"# ymin={grid.y_range[0]!r} ymax={grid.y_range[1]!r} ysteps={grid.y_range[2]}\n"
        )
        fh.write(f"# quantum={_fmt(grid.quantum)} band={_fmt(grid.band[1])}\n")
        fh.write("# columns: x,y,value\n")
        xs, ys = grid.x, grid.y
        for i, xv in enumerate(xs):
            for j, yv in enumerate(ys):
                fh.write(f"{_fmt(xv)},{_fmt(yv)},{_fmt(grid.values[i, j])}\n")


# ---------------------------------------------------------------------------
# CSV points


def read_csv_points(path, has_labels: bool = False):
    """Read one point per row; ``#`` lines are comments.

    With ``has_labels`` the final column is an integer class label and a
    ``LabeledDataset`` is returned; otherwise a plain point matrix.
    Malformed rows report their 1-based line number.
    """
    rows: list[list[float]] = []
    width: int | None = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            cells = text.split(",")
            try:
                row = [float(c) for c in cells]
            except ValueError as exc:
                raise ValueError(f"{path}: non-numeric cell at line {lineno}") from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ValueError(
                    f"{path}: ragged row at line {lineno} "
                    f"(expected {width} columns, got {len(row)})"
                )
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    if not has_labels:
        return data
    if data.shape[1] < 2:
        raise ValueError(f"{path}: labeled data needs at least two columns")
    labels = data[:, -1]
    if not np.all(labels == labels.astype(int)):
        raise ValueError(f"{path}: label column contains non-integer values")
    return LabeledDataset(points=data[:, :-1], labels=labels.astype(int))


def write_points_csv(path, points, labels=None) -> None:
    points = as_point_matrix(points, name="points")
    with open(path, "w") as fh:
        fh.write(f"# points n={points.shape[0]} dim={points.shape[1]}")
        fh.write(" labeled\n" if labels is not None else "\n")
        for i, row in enumerate(points):
            cells = [_fmt(v) for v in row]
            if labels is not None:
                cells.append(str(int(labels[i])))
            fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# model persistence


def _fmt(v: float) -> str:
    return format(float(v), ".17e")


def _encode_array(a: np.ndarray) -> dict:
    a = np.asarray(a)
    if np.issubdtype(a.dtype, np.integer):
        return {
            "shape": list(a.shape),
            "dtype": "int64",
            "data": " ".join(str(int(v)) for v in a.ravel()),
        }
    return {
        "shape": list(a.shape),
        "dtype": "float64",
        "data": " ".join(_fmt(v) for v in a.ravel()),
    }


def _decode_array(obj, name: str) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in obj["shape"])
        dtype = obj.get("dtype", "float64")
        text = obj["data"]
    except (TypeError, KeyError) as exc:
        raise ModelSchemaError(f"bad array field {name!r}") from exc
    parts = text.split() if text else []
    if len(parts) != int(np.prod(shape)):
        raise ModelSchemaError(
            f"array {name!r} has {len(parts)} values for shape {shape}"
        )
    if dtype == "int64":
        values = np.array([int(p) for p in parts], dtype=np.int64)
    else:
        values = np.array([float(p) for p in parts], dtype=float)
    return values.reshape(shape)


def _encode_spec(spec: KernelSpec) -> dict:
    return {
        "family": spec.family.value,
        "degree": int(spec.degree),
        "theta": _fmt(spec.theta),
        "width": _fmt(spec.width) if spec.width is not None else None,
    }


def _decode_spec(obj) -> KernelSpec:
    try:
        family = KernelFamily(obj["family"])
        width = obj.get("width")
        return KernelSpec(
            family=family,
            degree=int(obj["degree"]),
            theta=float(obj["theta"]),
            width=float(width) if width is not None else None,
        )
    except (TypeError, KeyError, ValueError) as exc:
        raise ModelSchemaError(f"bad kernel spec: {exc}") from exc


def _encode_avica(model: AvicaModel) -> dict:
    return {
        "spec": _encode_spec(model.spec),
        "anchors": _encode_array(model.Y),
        "epsilon": _fmt(model.epsilon),
        "normalizer": _fmt(model.normalizer),
        "rank_caps": (
            {str(k): int(v) for k, v in model.rank_caps.items()} if model.rank_caps else None
        ),
        "layers": [
            {
                "degree": layer.degree,
                "epsilon_d": _fmt(layer.epsilon_d),
                "S": _encode_array(layer.S),
                "V": _encode_array(layer.V),
                "S_perp": _encode_array(layer.S_perp),
                "V_perp": _encode_array(layer.V_perp),
                "generative_rows": _encode_array(layer.generative_rows),
            }
            for layer in model.layers
        ],
    }


def _validate_layer(layer: DegreeLayer, D: int, capped: bool) -> None:
    r, rp = layer.S.shape[0], layer.S_perp.shape[0]
    if layer.V.shape != (r, D) or layer.V_perp.shape != (rp, D):
        raise ModelSchemaError(f"degree {layer.degree}: singular vector shapes are inconsistent")
    W = np.vstack([layer.V, layer.V_perp])
    if W.shape[0]:
        gram = W @ W.T
        if np.max(np.abs(gram - np.eye(W.shape[0]))) > 1e-10:
            raise ModelSchemaError(f"degree {layer.degree}: right vectors are not orthonormal")
    spectrum = np.concatenate([layer.S, layer.S_perp])
    if spectrum.size and np.any(np.diff(spectrum) > 0):
        raise ModelSchemaError(f"degree {layer.degree}: spectrum is not sorted descending")
    if not capped:
        if layer.S.size and layer.S[-1] < layer.epsilon_d:
            raise ModelSchemaError(f"degree {layer.degree}: retained value below threshold")
        if layer.S_perp.size and layer.S_perp[0] >= layer.epsilon_d:
            raise ModelSchemaError(f"degree {layer.degree}: rejected value above threshold")
    rows = layer.generative_rows
    if rows.size:
        if rows.min() < 0 or rows.max() >= rp or np.any(np.diff(rows) <= 0):
            raise ModelSchemaError(f"degree {layer.degree}: bad generative row indices")
        if np.any(layer.S_perp[rows] <= 0.0):
            raise ModelSchemaError(f"degree {layer.degree}: generative feature with zero quantum")


def _decode_avica(obj) -> AvicaModel:
    spec = _decode_spec(obj.get("spec"))
    try:
        Y = _decode_array(obj["anchors"], "anchors")
        epsilon = float(obj["epsilon"])
        normalizer = float(obj["normalizer"])
        caps_obj = obj.get("rank_caps")
        rank_caps = (
            {int(k): int(v) for k, v in caps_obj.items()} if caps_obj else None
        )
        layer_objs = obj["layers"]
    except (TypeError, KeyError, ValueError) as exc:
        raise ModelSchemaError(f"bad model fields: {exc}") from exc
    if Y.ndim != 2 or not layer_objs:
        raise ModelSchemaError("anchors must be a matrix and layers non-empty")

    layers = []
    eps_d = epsilon
    for i, lo in enumerate(layer_objs):
        try:
            layer = DegreeLayer(
                degree=int(lo["degree"]),
                S=_decode_array(lo["S"], "S"),
                V=_decode_array(lo["V"], "V"),
                S_perp=_decode_array(lo["S_perp"], "S_perp"),
                V_perp=_decode_array(lo["V_perp"], "V_perp"),
                epsilon_d=float(lo["epsilon_d"]),
                generative_rows=_decode_array(lo["generative_rows"], "generative_rows"),
            )
        except (TypeError, KeyError) as exc:
            raise ModelSchemaError(f"bad layer {i}: {exc}") from exc
        if layer.degree != i + 1:
            raise ModelSchemaError(f"layer {i} has degree {layer.degree}, expected {i + 1}")
        eps_d = eps_d * spec.theta
        if not np.isclose(layer.epsilon_d, eps_d, rtol=1e-12, atol=0.0):
            raise ModelSchemaError(
                f"degree {layer.degree}: threshold {layer.epsilon_d} breaks the "
                f"epsilon * theta^d chain (expected {eps_d})"
            )
        _validate_layer(layer, Y.shape[0], capped=bool(rank_caps and layer.degree in rank_caps))
        layers.append(layer)

    features = build_feature_registry(layers, spec.theta)
    return AvicaModel(
        spec=spec,
        Y=Y,
        layers=layers,
        epsilon=epsilon,
        features=features,
        normalizer=normalizer,
        rank_caps=rank_caps,
    )


def _encode_ipca(model: IpcaModel) -> dict:
    return {
        "spec": _encode_spec(model.spec),
        "anchors": _encode_array(model.Y),
        "epsilon": _fmt(model.epsilon),
        "normalizer": _fmt(model.normalizer),
        "alphas": _encode_array(
            np.vstack([f.alphas for f in model.features])
            if model.features
            else np.zeros((0, model.Y.shape[0]))
        ),
        "quanta": _encode_array(np.array([f.quantum for f in model.features])),
        "labels": [f.label.value for f in model.features],
    }


def _decode_ipca(obj) -> IpcaModel:
    spec = _decode_spec(obj.get("spec"))
    try:
        Y = _decode_array(obj["anchors"], "anchors")
        epsilon = float(obj["epsilon"])
        normalizer = float(obj["normalizer"])
        alphas = _decode_array(obj["alphas"], "alphas")
        quanta = _decode_array(obj["quanta"], "quanta")
        labels = [FeatureLabel(v) for v in obj["labels"]]
    except (TypeError, KeyError, ValueError) as exc:
        raise ModelSchemaError(f"bad model fields: {exc}") from exc
    if alphas.shape != (len(labels), Y.shape[0]) or quanta.shape != (len(labels),):
        raise ModelSchemaError("feature blocks have inconsistent shapes")
    if np.any(quanta < 0):
        raise ModelSchemaError("negative quantum")
    if np.any(np.diff(quanta) > 0):
        raise ModelSchemaError("features are not sorted by descending quantum")
    for i, (q, lab) in enumerate(zip(quanta, labels)):
        expected = FeatureLabel.DISCRIMINATIVE if q >= epsilon else FeatureLabel.GENERATIVE
        if lab is not expected:
            raise ModelSchemaError(f"feature {i} label does not match its quantum")
    if alphas.size:
        norms = np.linalg.norm(alphas, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-10:
            raise ModelSchemaError("feature coefficient rows are not unit norm")
    features = [
        Feature(alphas=alphas[i], degree=spec.degree, label=labels[i],
                quantum=float(quanta[i]), source_index=i)
        for i in range(len(labels))
    ]
    return IpcaModel(spec=spec, Y=Y, features=features, epsilon=epsilon, normalizer=normalizer)


def _encode_one_vs_all(model: OneVsAllModel) -> dict:
    fixed = not isinstance(model.epsilon, str)
    return {
        "spec": _encode_spec(model.spec),
        "maxdeg": int(model.maxdeg),
        "epsilon_rule": "fixed" if fixed else model.epsilon,
        "epsilon_value": _fmt(model.epsilon) if fixed else None,
        "anchors": _encode_array(model.anchors),
        "class_models": {
            str(c): _encode_avica(m) for c, m in model.class_models.items()
        },
    }


def _decode_one_vs_all(obj) -> OneVsAllModel:
    spec = _decode_spec(obj.get("spec"))
    try:
        maxdeg = int(obj["maxdeg"])
        rule = obj["epsilon_rule"]
        value = obj.get("epsilon_value")
        anchors = _decode_array(obj["anchors"], "anchors")
        class_objs = obj["class_models"]
    except (TypeError, KeyError, ValueError) as exc:
        raise ModelSchemaError(f"bad model fields: {exc}") from exc
    if rule == "fixed":
        if value is None:
            raise ModelSchemaError("fixed epsilon rule without a value")
        epsilon: float | str = float(value)
    elif rule == "logmean":
        epsilon = "logmean"
    else:
        raise ModelSchemaError(f"unknown epsilon rule {rule!r}")
    if not class_objs or len(class_objs) < 2:
        raise ModelSchemaError("one-vs-all model needs at least two classes")
    class_models = {int(c): _decode_avica(m) for c, m in class_objs.items()}
    return OneVsAllModel(
        spec=spec,
        maxdeg=maxdeg,
        epsilon=epsilon,
        anchors=anchors,
        class_models=class_models,
    )


_KINDS = {
    AvicaModel: ("avica", _encode_avica),
    IpcaModel: ("ipca", _encode_ipca),
    OneVsAllModel: ("one_vs_all", _encode_one_vs_all),
}
_DECODERS = {"avica": _decode_avica, "ipca": _decode_ipca, "one_vs_all": _decode_one_vs_all}


def save_model(model, path) -> None:
    """Write any fitted model to a versioned JSON container."""
    for cls, (kind, encode) in _KINDS.items():
        if isinstance(model, cls):
            payload = {
                "format": FORMAT_NAME,
                "version": FORMAT_VERSION,
                "kind": kind,
                "model": encode(model),
            }
            with open(path, "w") as fh:
                json.dump(payload, fh, indent=1, sort_keys=True)
                fh.write("\n")
            return
    raise TypeError(f"cannot save object of type {type(model).__name__}")


def load_model(path):
    """Load a model container, validating version, schema, and invariants."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelCorruptError(f"{path}: not a valid model container: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT_NAME:
        raise ModelCorruptError(f"{path}: missing or wrong container format marker")
    version = payload.get("version")
    if version != FORMAT_VERSION:
        raise ModelVersionError(
            f"{path}: format version {version!r} is not supported (expected {FORMAT_VERSION})"
        )
    kind = payload.get("kind")
    decoder = _DECODERS.get(kind)
    if decoder is None:
        raise ModelSchemaError(f"{path}: unknown model kind {kind!r}")
    model_obj = payload.get("model")
    if not isinstance(model_obj, dict):
        raise ModelSchemaError(f"{path}: missing model body")
    return decoder(model_obj)
