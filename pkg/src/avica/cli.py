"""Command-line front-end: synth / fit / eval / classify / levelset.

Every run is reproducible from its flags: all randomness flows from the
single ``--seed`` flag, and numeric output is written with full float
precision, so identical invocations produce identical files.  Report paths
(classify, levelset) also render a figure next to the delimited output
unless ``--no-figure`` is given.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .avica import avica_eval, avica_fit, feature_count_profile
from .classifier import LabeledDataset, classify_batch, evaluate_accuracy, train_one_vs_all
from .dataio import (
    Blobs,
    Circle,
    Line,
    ModelIOError,
    SyntheticSpec,
    UnionOfCircles,
    generate,
    level_set_grid,
    load_model,
    read_csv_points,
    save_model,
    write_level_set_csv,
    write_points_csv,
)
from .ipca import ipca_eval, ipca_fit
from .kernels import DEFAULT_THETA, KernelSpec
from .avica import AvicaModel
from .ipca import IpcaModel


def _fmt(v: float) -> str:
    return format(float(v), ".17e")


def _parse_floats(text: str, flag: str, parser: argparse.ArgumentParser) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        parser.error(f"{flag} must be a comma-separated list of numbers, got {text!r}")


def _kernel_spec(args, parser: argparse.ArgumentParser, degree: int) -> KernelSpec:
    if not (0.0 < args.theta <= 1.0):
        parser.error(f"--theta must lie in (0, 1], got {args.theta}")
    if args.kernel == "gauss":
        if args.width is None or args.width <= 0:
            parser.error("--width must be a positive number for the Gaussian kernel")
        return KernelSpec.gaussian(args.width, theta=args.theta)
    if args.kernel == "hom":
        return KernelSpec.homogeneous(degree, theta=args.theta)
    return KernelSpec.inhomogeneous(degree, theta=args.theta)


def _epsilon_policy(args, parser: argparse.ArgumentParser):
    if args.epsilon is not None and args.epsilon_rule is not None:
        parser.error("--epsilon and --epsilon-rule are mutually exclusive")
    if args.epsilon is not None:
        if args.epsilon <= 0:
            parser.error(f"--epsilon must be > 0, got {args.epsilon}")
        return args.epsilon
    if args.epsilon_rule is not None:
        return args.epsilon_rule
    return None


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", choices=["hom", "inhom", "gauss"], default="inhom",
                   help="kernel family (default: inhom)")
    p.add_argument("--theta", type=float, default=DEFAULT_THETA,
                   help="kernel scale factor in (0, 1] (default: 1/sqrt(2))")
    p.add_argument("--width", type=float, default=None,
                   help="Gaussian kernel width (gauss only)")


def _add_epsilon_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=None,
                   help="fixed singular value threshold")
    p.add_argument("--epsilon-rule", choices=["logmean"], default=None,
                   help="derive the threshold from the spectrum instead")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avica",
        description="Generative/discriminative kernel feature extraction toolbox.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic manifold samples")
    p.add_argument("--shape", choices=["circle", "line", "circles", "blobs"], default="circle")
    p.add_argument("--radius", type=float, default=10.0, help="circle radius")
    p.add_argument("--radii", default="5,10", help="comma list of radii (shape=circles)")
    p.add_argument("--direction", default="1,0", help="line direction vector")
    p.add_argument("--offset", default="0,0", help="a point on the line")
    p.add_argument("--centers", default="0,0;5,5", help="blob centers, ';'-separated points")
    p.add_argument("--spreads", default="1,1", help="per-blob standard deviations")
    p.add_argument("--n", type=int, default=200, help="points (per component)")
    p.add_argument("--noise", type=float, default=0.0, help="per-coordinate noise std")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("fit", help="fit a feature-extraction model")
    p.add_argument("--algo", choices=["ipca", "avica"], default="avica")
    _add_kernel_flags(p)
    p.add_argument("--degree", type=int, default=2, help="kernel degree (ipca)")
    p.add_argument("--maxdeg", type=int, default=2, help="maximum degree (avica)")
    p.add_argument("--anchors", type=int, default=None,
                   help="number of anchor points (default: number of data points)")
    _add_epsilon_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="input", required=True, help="input points CSV")
    p.add_argument("--model", required=True, help="output model path")

    p = sub.add_parser("eval", help="evaluate model features on points")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True, help="output feature CSV")

    p = sub.add_parser("classify", help="train and score a one-vs-all classifier")
    p.add_argument("--train", required=True, help="labeled training CSV")
    p.add_argument("--test", required=True, help="labeled test CSV")
    _add_kernel_flags(p)
    p.add_argument("--maxdeg", type=int, default=2)
    _add_epsilon_flags(p)
    p.add_argument("--anchor-cap", type=int, default=200,
                   help="anchor pool subsample size cap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", required=True, help="output report CSV")
    p.add_argument("--no-figure", action="store_true", help="skip the report figure")

    p = sub.add_parser("levelset", help="export a level-set grid of the manifold feature")
    p.add_argument("--model", required=True)
    p.add_argument("--xmin", type=float, required=True)
    p.add_argument("--xmax", type=float, required=True)
    p.add_argument("--ymin", type=float, required=True)
    p.add_argument("--ymax", type=float, required=True)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--out", required=True, help="output grid CSV")
    p.add_argument("--no-figure", action="store_true", help="skip the grid figure")

    return parser


def _cmd_synth(args, parser) -> int:
    if args.n < 1:
        parser.error(f"--n must be >= 1, got {args.n}")
    if args.noise < 0:
        parser.error(f"--noise must be >= 0, got {args.noise}")
    if args.shape == "circle":
        if args.radius <= 0:
            parser.error(f"--radius must be > 0, got {args.radius}")
        shape = Circle(args.radius)
    elif args.shape == "circles":
        shape = UnionOfCircles(_parse_floats(args.radii, "--radii", parser))
    elif args.shape == "line":
        shape = Line(
            _parse_floats(args.direction, "--direction", parser),
            _parse_floats(args.offset, "--offset", parser),
        )
    else:
        centers = tuple(
            _parse_floats(part, "--centers", parser) for part in args.centers.split(";")
        )
        shape = Blobs(centers, _parse_floats(args.spreads, "--spreads", parser))
    spec = SyntheticSpec(shape=shape, count=args.n, noise_sigma=args.noise, seed=args.seed)
    points, labels = generate(spec)
    write_points_csv(args.out, points, labels)
    print(f"wrote {points.shape[0]} points to {args.out}")
    return 0


def _cmd_fit(args, parser) -> int:
    if args.anchors is not None and args.anchors < 1:
        parser.error(f"--anchors must be >= 1, got {args.anchors}")
    epsilon = _epsilon_policy(args, parser)
    data = read_csv_points(args.input)
    if args.algo == "ipca":
        if args.degree < 0:
            parser.error(f"--degree must be >= 0, got {args.degree}")
        spec = _kernel_spec(args, parser, args.degree)
        model = ipca_fit(data, spec, n_anchors=args.anchors, epsilon=epsilon, seed=args.seed)
        n_disc = len(model.discriminative_features)
        n_gen = len(model.generative_features)
        print(f"ipca: {n_disc} discriminative + {n_gen} generative features "
              f"(epsilon={model.epsilon:.6g})")
    else:
        if args.maxdeg < 1:
            parser.error(f"--maxdeg must be >= 1, got {args.maxdeg}")
        spec = _kernel_spec(args, parser, 1)
        model = avica_fit(
            data, spec, maxdeg=args.maxdeg, epsilon=epsilon,
            n_anchors=args.anchors, seed=args.seed,
        )
        profile = " ".join(f"d{d}:{r}+{g}" for d, r, g in feature_count_profile(model))
        print(f"avica: per-degree disc+gen counts {profile} (epsilon={model.epsilon:.6g})")
    save_model(model, args.model)
    print(f"saved model to {args.model}")
    return 0


def _cmd_eval(args, parser) -> int:
    model = load_model(args.model)
    points = read_csv_points(args.input)
    if isinstance(model, AvicaModel):
        per_degree = avica_eval(model, points)
        names: list[str] = []
        blocks: list[np.ndarray] = []
        for (disc, gen), layer in zip(per_degree, model.layers):
            names += [f"d{layer.degree}_disc_{i}" for i in range(disc.shape[1])]
            names += [f"d{layer.degree}_gen_{i}" for i in range(gen.shape[1])]
            blocks += [disc, gen]
        values = np.hstack(blocks)
    elif isinstance(model, IpcaModel):
        values = ipca_eval(model, points)
        names = [f"{f.label.value[:4]}_{i}" for i, f in enumerate(model.features)]
    else:
        raise ValueError("eval expects an ipca or avica model, not a classifier")
    with open(args.out, "w") as fh:
        fh.write("# feature values, one row per input point\n")
        fh.write("# columns: " + ",".join(names) + "\n")
        for row in values:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    print(f"wrote {values.shape[0]}x{values.shape[1]} feature matrix to {args.out}")
    return 0


def _cmd_classify(args, parser) -> int:
    if args.maxdeg < 1:
        parser.error(f"--maxdeg must be >= 1, got {args.maxdeg}")
    if args.anchor_cap < 1:
        parser.error(f"--anchor-cap must be >= 1, got {args.anchor_cap}")
    epsilon = _epsilon_policy(args, parser)
    if epsilon is None:
        epsilon = "logmean"
    spec = _kernel_spec(args, parser, 1)
    train = read_csv_points(args.train, has_labels=True)
    test = read_csv_points(args.test, has_labels=True)
    model = train_one_vs_all(
        train, spec, maxdeg=args.maxdeg, epsilon=epsilon,
        seed=args.seed, anchor_cap=args.anchor_cap,
    )
    predicted = classify_batch(model, test.points)
    accuracy = float(np.mean(predicted == test.labels))
    classes = model.classes
    index = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=int)
    for true, pred in zip(test.labels, predicted):
        confusion[index[int(true)], index[int(pred)]] += 1

    with open(args.report, "w") as fh:
        fh.write("# one-vs-all classification report\n")
        fh.write("class,true_count,predicted_count,correct_count,accuracy\n")
        for c in classes:
            i = index[c]
            true_n = int(confusion[i].sum())
            pred_n = int(confusion[:, i].sum())
            correct = int(confusion[i, i])
            cls_acc = correct / true_n if true_n else 0.0
            fh.write(f"{c},{true_n},{pred_n},{correct},{cls_acc:.6f}\n")
        fh.write(f"overall,{len(test.labels)},{len(test.labels)},"
                 f"{int(np.sum(predicted == test.labels))},{accuracy:.6f}\n")
    print(f"accuracy {accuracy:.4f} over {len(test.labels)} test points; "
          f"report written to {args.report}")
    if not args.no_figure:
        from .figures import render_confusion

        figure_path = _figure_path(args.report)
        render_confusion(confusion, classes, accuracy, figure_path)
        print(f"figure written to {figure_path}")
    return 0


def _cmd_levelset(args, parser) -> int:
    if args.steps < 2:
        parser.error(f"--steps must be >= 2, got {args.steps}")
    if args.xmax <= args.xmin:
        parser.error("--xmax must exceed --xmin")
    if args.ymax <= args.ymin:
        parser.error("--ymax must exceed --ymin")
    model = load_model(args.model)
    if not isinstance(model, AvicaModel):
        raise ValueError("levelset expects an avica model")
    grid = level_set_grid(model, (args.xmin, args.xmax), (args.ymin, args.ymax), args.steps)
    write_level_set_csv(grid, args.out)
    print(f"wrote {grid.x_range[2]}x{grid.y_range[2]} grid to {args.out} "
          f"(quantum={grid.quantum:.6g}, band=+-{grid.band[1]:.6g})")
    if not args.no_figure:
        from .figures import render_level_set

        figure_path = _figure_path(args.out)
        render_level_set(grid, figure_path, title=f"|F| <= {grid.band[1]:.3g}")
        print(f"figure written to {figure_path}")
    return 0


def _figure_path(csv_path: str) -> str:
    stem = csv_path[:-4] if csv_path.lower().endswith(".csv") else csv_path
    return stem + ".png"


_COMMANDS = {
    "synth": _cmd_synth,
    "fit": _cmd_fit,
    "eval": _cmd_eval,
    "classify": _cmd_classify,
    "levelset": _cmd_levelset,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, parser)
    except (ValueError, TypeError, ModelIOError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
