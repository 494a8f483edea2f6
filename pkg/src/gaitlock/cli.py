"""Command-line front end wiring the pipeline stages together.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import metrics, pipeline, svm, synthgait
from .background import build_background, load_background, save_background
from .errors import GaitlockError, LengthMismatch
from .gaitcycle import estimate_period, partition_cycles, width_signal
from .imagery import frame_filename, load_sequence, save_sequence, write_pgm
from .segmentation import SilhouetteMask, clean_mask, difference_mask

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(EXIT_USAGE)


def _threshold(value: str):
    return value if value == "auto" else int(value)


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _load_masks(directory, fps: float) -> list[SilhouetteMask]:
    seq = load_sequence(directory, fps)
    return [SilhouetteMask(f.pixels > 127) for f in seq]


def cmd_background(args) -> int:
    seq = load_sequence(args.in_dir, args.fps)
    model = build_background(seq, args.technique, _threshold(args.threshold))
    save_background(model, args.out)
    _say(args, f"background ({model.technique}) written to {args.out}")
    return EXIT_OK


def cmd_segment(args) -> int:
    bg = load_background(args.bg)
    seq = load_sequence(args.in_dir, args.fps)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(seq, start=1):
        mask = clean_mask(difference_mask(frame, bg, _threshold(args.threshold)))
        write_pgm(out_dir / frame_filename(i), mask.to_pixels())
    _say(args, f"{len(seq)} silhouettes written to {out_dir}")
    return EXIT_OK


def cmd_cycles(args) -> int:
    masks = _load_masks(args.in_dir, args.fps)
    signal = width_signal(masks, args.fps)
    period = estimate_period(signal)
    cycles = partition_cycles(signal, period)
    print(f"period_frames,{period}")
    for cycle in cycles:
        print(f"cycle,{cycle.start_frame},{cycle.end_frame}")
    print("frame,width")
    for i, w in enumerate(signal.values):
        print(f"{i},{w:g}")
    return EXIT_OK


def cmd_features(args) -> int:
    masks = _load_masks(args.in_dir, args.fps)
    sequence = args.sequence or Path(args.in_dir).name
    row = pipeline.masks_feature_row(args.subject, sequence, masks, args.fps)
    pipeline.write_features_csv([row], args.out)
    _say(args, f"features for {args.subject}/{sequence} written to {args.out}")
    return EXIT_OK


def _kernel_spec_from_args(args) -> svm.KernelSpec:
    if args.kernel == svm.KERNEL_POLY:
        return svm.KernelSpec(args.kernel, args.c, degree=args.degree)
    if args.kernel == svm.KERNEL_RBF:
        return svm.KernelSpec(args.kernel, args.c, sigma=args.sigma)
    return svm.KernelSpec(args.kernel, args.c)


def cmd_train(args) -> int:
    rows = pipeline.read_features_csv(args.features)
    x = np.array([r.vector for r in rows])
    model = svm.train_multiclass(x, [r.subject for r in rows], _kernel_spec_from_args(args))
    svm.save_model(model, args.out)
    _say(args, f"model with {len(model.binaries)} machines written to {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = svm.load_model(args.model)
    rows = pipeline.read_features_csv(args.features)
    print("subject,sequence,predicted")
    for row in rows:
        print(f"{row.subject},{row.sequence},{svm.predict(model, row.vector)}")
    return EXIT_OK


def _read_labels(path) -> list[str]:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if lines and lines[0].lower() == "label":
        lines = lines[1:]
    return lines


def cmd_evaluate(args) -> int:
    model = svm.load_model(args.model)
    rows = pipeline.read_features_csv(args.features)
    truth = _read_labels(args.labels) if args.labels else [r.subject for r in rows]
    if len(truth) != len(rows):
        raise LengthMismatch(f"{len(truth)} labels for {len(rows)} feature rows")
    predicted = [svm.predict(model, r.vector) for r in rows]
    cm = metrics.evaluate(truth, predicted)
    scores = metrics.measures(cm)
    print("confusion matrix (rows = truth, columns = predicted):")
    width = max(len(c) for c in cm.classes) + 2
    print(" " * width + "".join(c.rjust(width) for c in cm.classes))
    for i, cls in enumerate(cm.classes):
        print(cls.rjust(width) + "".join(str(v).rjust(width) for v in cm.counts[i]))
    print()
    for key in ("accuracy", "precision", "recall", "f_measure"):
        print(f"{key} = {scores[key]:.6f}")
    print()
    print("csv:")
    for line in pipeline.render_confusion(cm):
        print(line)
    print("measure,value")
    for key in ("accuracy", "precision", "recall", "f_measure"):
        print(f"{key},{scores[key]:.6f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    kv = pipeline.read_kv_file(args.spec)
    spec = synthgait.WalkerSpec(
        body_height=int(kv.get("body_height", 80)),
        body_width=int(kv.get("body_width", 24)),
        period_frames=int(kv.get("period_frames", 24)),
        stride_px=int(kv.get("stride_px", 48)),
        leg_swing_amplitude=int(kv.get("leg_swing_amplitude", 36)),
        start_x=int(kv.get("start_x", 40)),
        direction=int(kv.get("direction", 1)),
        noise_rate=float(kv.get("noise_rate", 0.0)),
        seed=int(kv.get("seed", args.seed or 0)),
    )
    seq, truth = synthgait.generate(
        spec,
        frame_w=int(kv.get("frame_w", 352)),
        frame_h=int(kv.get("frame_h", 144)),
        n_frames=int(kv.get("n_frames", 3 * spec.period_frames + 8)),
        background_level=int(kv.get("background_level", 40)),
        fps=float(kv.get("fps", 25.0)),
    )
    out_dir = Path(args.out)
    save_sequence(seq, out_dir)
    synthgait.write_truth_csv(truth, out_dir / "truth.csv")
    _say(args, f"{len(seq)} frames and truth.csv written to {out_dir}")
    return EXIT_OK


def _pipeline_config(args) -> pipeline.PipelineConfig:
    overrides = {"data_dir": args.data, "out_dir": args.out}
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
        overrides["split_seed"] = str(args.seed)
    if args.config:
        return pipeline.parse_config(args.config, overrides)
    return pipeline.config_from_values({k: v for k, v in overrides.items() if v is not None})


def cmd_pipeline(args) -> int:
    result = pipeline.run_pipeline(_pipeline_config(args), resume=args.resume)
    _say(args, result.report)
    return EXIT_OK


def cmd_ablation(args) -> int:
    results = pipeline.run_ablation(_pipeline_config(args), resume=args.resume)
    if not args.quiet:
        print("feature_set,dimension,accuracy")
        for r in results:
            print(f"{r['feature_set']},{r['dimension']},{r['accuracy']:.6f}")
    return EXIT_OK


def cmd_kernel_sweep(args) -> int:
    results = pipeline.run_kernel_sweep(_pipeline_config(args), resume=args.resume)
    if not args.quiet:
        print("kernel,c,degree,sigma,accuracy")
        for r in results:
            degree = "" if r["degree"] is None else r["degree"]
            sigma = "" if r["sigma"] is None else r["sigma"]
            print(f"{r['kernel']},{r['c']},{degree},{sigma},{r['accuracy']:.6f}")
    return EXIT_OK


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key=value configuration file")
    common.add_argument("--seed", type=int, default=None, help="override the global seed")
    common.add_argument("--resume", action="store_true", help="reuse intermediate outputs")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = _Parser(prog="gaitlock", description="gait-based walker identification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("background", parents=[common], help="build a background model")
    p.add_argument("--technique", choices=("cdm", "median", "histogram"), default="median")
    p.add_argument("--threshold", default="auto", help="auto or an integer (cdm only)")
    p.add_argument("--in", dest="in_dir", required=True, help="frame directory")
    p.add_argument("--out", required=True, help="output bg.pgm")
    p.add_argument("--fps", type=float, default=25.0)
    p.set_defaults(func=cmd_background)

    p = sub.add_parser("segment", parents=[common], help="extract silhouettes")
    p.add_argument("--bg", required=True, help="background PGM")
    p.add_argument("--threshold", default="auto")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True, help="silhouette output directory")
    p.add_argument("--fps", type=float, default=25.0)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("cycles", parents=[common], help="estimate the gait period")
    p.add_argument("--in", dest="in_dir", required=True, help="silhouette directory")
    p.add_argument("--fps", type=float, default=25.0)
    p.set_defaults(func=cmd_cycles)

    p = sub.add_parser("features", parents=[common], help="extract the fused descriptor")
    p.add_argument("--in", dest="in_dir", required=True, help="silhouette directory")
    p.add_argument("--fps", type=float, default=25.0)
    p.add_argument("--out", required=True, help="output features.csv")
    p.add_argument("--subject", default="subject")
    p.add_argument("--sequence", default=None)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", parents=[common], help="train the multi-class SVM")
    p.add_argument("--features", required=True)
    p.add_argument("--kernel", choices=svm.KERNELS, default="rbf")
    p.add_argument("--c", type=float, default=10.0)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--out", required=True, help="output model file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="classify feature rows")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common], help="confusion matrix and measures")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", default=None, help="truth labels, one per line")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic walker")
    p.add_argument("--spec", required=True, help="walker spec key=value file")
    p.add_argument("--out", required=True, help="output frame directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", parents=[common], help="end-to-end run")
    p.add_argument("--data", default=None, help="dataset root (subject/sequence dirs)")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("ablation", parents=[common], help="per-feature-set accuracies")
    p.add_argument("--data", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ablation)

    p = sub.add_parser("kernel-sweep", parents=[common], help="best accuracy per kernel")
    p.add_argument("--data", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_kernel_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if not exc.code else int(exc.code)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GaitlockError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
