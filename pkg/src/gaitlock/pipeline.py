"""End-to-end orchestration: dataset walking, per-sequence features,
training, evaluation, and the feature-set / kernel comparison harnesses.

A dataset is a directory tree ``<data_dir>/<subject>/<sequence>/`` where
each sequence directory holds numbered PGM frames. Every run writes its
artifacts (features.csv, model.svm, gallery.csv, report.txt) into the
configured output directory; reruns with ``resume`` reuse intermediates.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import features as feat
from . import gaitcycle, metrics, svm
from .background import TECHNIQUES, build_background
from .errors import EmptyDirectory, EmptyInput, GaitlockError, StageError
from .imagery import load_sequence
from .segmentation import clean_mask, difference_mask

FEATURE_SETS = (
    ("S", (0, 4)),
    ("T", (4, 8)),
    ("W", (8, 14)),
    ("S+T", (0, 8)),
    ("S+W", None),  # non-contiguous: spatial + wavelet
    ("S+T+W", (0, 14)),
)

SWEEP_C = (0.1, 1.0, 10.0, 100.0)
SWEEP_DEGREE = (2, 3)
SWEEP_SIGMA = (0.5, 1.0, 2.0, 5.0)


@dataclass
class PipelineConfig:
    """Resolved configuration; every field lands in the report."""

    data_dir: str = ""
    out_dir: str = ""
    features_csv: str = ""  # precomputed features; skips the imaging stages
    fps: float = 25.0
    background_technique: str = "median"
    background_threshold: str = "auto"
    segmentation_threshold: str = "auto"
    kernel: str = "rbf"
    c: float = 10.0
    degree: int = 3
    sigma: float = 2.0
    split_fraction: float = 0.75
    split_seed: int = 0
    seed: int = 0
    smo_tol: float = 1e-3
    smo_max_passes: int = 10

    def validate(self) -> None:
        if not 0.0 < self.split_fraction < 1.0:
            raise ValueError("split_fraction must lie in (0, 1)")
        if self.background_technique not in TECHNIQUES:
            raise ValueError(f"unknown background technique {self.background_technique!r}")
        if self.kernel not in svm.KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if not self.fps > 0:
            raise ValueError("fps must be positive")
        named = [p for p in (self.data_dir, self.out_dir, self.features_csv) if p]
        if len(set(Path(p).resolve() for p in named)) != len(named):
            raise ValueError("data_dir, out_dir and features_csv must be distinct paths")

    def kernel_spec(self) -> svm.KernelSpec:
        if self.kernel == svm.KERNEL_POLY:
            return svm.KernelSpec(svm.KERNEL_POLY, self.c, degree=self.degree)
        if self.kernel == svm.KERNEL_RBF:
            return svm.KernelSpec(svm.KERNEL_RBF, self.c, sigma=self.sigma)
        return svm.KernelSpec(svm.KERNEL_LINEAR, self.c)


def read_kv_file(path) -> dict[str, str]:
    """Flat ``key = value`` file with ``#`` comments; '=' is optional."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, value = line.partition("=")
        else:
            key, _, value = line.partition(" ")
        values[key.strip()] = value.strip()
    return values


def parse_config(path, overrides: dict | None = None) -> PipelineConfig:
    values = read_kv_file(path)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_values(values)


def config_from_values(values: dict) -> PipelineConfig:
    cfg = PipelineConfig()
    known = {f.name for f in fields(PipelineConfig)}
    for key, value in values.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        current = getattr(cfg, key)
        if isinstance(current, int) and not isinstance(current, bool):
            value = int(value)
        elif isinstance(current, float):
            value = float(value)
        setattr(cfg, key, value)
    cfg.validate()
    return cfg


@dataclass
class FeatureRow:
    subject: str
    sequence: str
    vector: np.ndarray
    period: int = 0


def discover_dataset(data_dir) -> list[tuple[str, str, Path]]:
    """(subject, sequence, path) triples, sorted for determinism."""
    root = Path(data_dir)
    if not root.is_dir():
        raise EmptyDirectory(f"dataset directory {root} does not exist")
    triples = []
    for subject_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for seq_dir in sorted(p for p in subject_dir.iterdir() if p.is_dir()):
            triples.append((subject_dir.name, seq_dir.name, seq_dir))
    if not triples:
        raise EmptyDirectory(f"no <subject>/<sequence> directories under {root}")
    return triples


def _stage(name: str):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and isinstance(exc, GaitlockError) and not isinstance(exc, StageError):
                raise StageError(name, exc) from exc
            return False

    return _Ctx()


def masks_feature_row(subject: str, sequence: str, masks, fps: float) -> FeatureRow:
    """Fused descriptor of an already-segmented silhouette sequence."""
    with _stage("gait-cycle"):
        signal = gaitcycle.width_signal(masks, fps)
        period = gaitcycle.estimate_period(signal)
        cycles = gaitcycle.partition_cycles(signal, period)
        window = gaitcycle.select_feature_window(cycles)
    with _stage("features"):
        lo, hi = window[0].start_frame, window[-1].end_frame
        window_masks = masks[lo:hi + 1]
        spatial = feat.spatial_features([m.bbox for m in window_masks])
        centroids = [m.centroid_x() for m in window_masks]
        temporal = feat.temporal_features(centroids, period, fps)
        wavelet = feat.wavelet_features(window_masks)
        vector = feat.FeatureVector(spatial, temporal, wavelet).fused
    return FeatureRow(subject, sequence, vector, period)


def sequence_feature_row(subject: str, sequence: str, seq_dir, cfg: PipelineConfig) -> FeatureRow:
    """Run one sequence through ingestion, segmentation, cycle analysis
    and feature extraction."""
    with _stage("ingestion"):
        seq = load_sequence(seq_dir, cfg.fps)
    with _stage("background"):
        bg = build_background(seq, cfg.background_technique, cfg.background_threshold)
    with _stage("segmentation"):
        masks = [clean_mask(difference_mask(f, bg, cfg.segmentation_threshold)) for f in seq]
    return masks_feature_row(subject, sequence, masks, cfg.fps)


def extract_features(cfg: PipelineConfig) -> list[FeatureRow]:
    with _stage("ingestion"):
        triples = discover_dataset(cfg.data_dir)
    return [sequence_feature_row(subject, sequence, path, cfg) for subject, sequence, path in triples]


def write_features_csv(rows: list[FeatureRow], path) -> None:
    lines = ["subject,sequence," + ",".join(feat.FEATURE_NAMES)]
    for row in rows:
        values = ",".join(format(v, ".17g") for v in row.vector)
        lines.append(f"{row.subject},{row.sequence},{values}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def read_features_csv(path) -> list[FeatureRow]:
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines:
        raise EmptyInput(f"features file {path} is empty")
    expected = "subject,sequence," + ",".join(feat.FEATURE_NAMES)
    if lines[0] != expected:
        raise ValueError(f"unexpected features header in {path}")
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2 + len(feat.FEATURE_NAMES):
            raise ValueError(f"bad features row: {line!r}")
        rows.append(FeatureRow(parts[0], parts[1], np.array([float(v) for v in parts[2:]])))
    if not rows:
        raise EmptyInput(f"features file {path} has no rows")
    return rows


def split_rows(
    rows: list[FeatureRow], fraction: float, seed: int
) -> tuple[list[FeatureRow], list[FeatureRow]]:
    """Per-subject train/test split; at least one sequence on each side."""
    by_subject: dict[str, list[FeatureRow]] = {}
    for row in rows:
        by_subject.setdefault(row.subject, []).append(row)
    train: list[FeatureRow] = []
    test: list[FeatureRow] = []
    for idx, subject in enumerate(sorted(by_subject)):
        group = sorted(by_subject[subject], key=lambda r: r.sequence)
        n = len(group)
        n_test = max(1, round(n * (1.0 - fraction)))
        if n_test >= n:
            raise ValueError(f"subject {subject} has too few sequences to split ({n})")
        rng = np.random.default_rng([seed, idx])
        test_idx = set(rng.choice(n, size=n_test, replace=False).tolist())
        for i, row in enumerate(group):
            (test if i in test_idx else train).append(row)
    return train, test


def _subset_slice(vector: np.ndarray, name: str) -> np.ndarray:
    if name == "S+W":
        return np.concatenate([vector[0:4], vector[8:14]])
    bounds = dict(FEATURE_SETS)[name]
    return vector[bounds[0]:bounds[1]]


def _train_eval(
    train: list[FeatureRow],
    test: list[FeatureRow],
    spec: svm.KernelSpec,
    cfg: PipelineConfig,
    subset: str = "S+T+W",
) -> tuple[svm.SvmModel, metrics.ConfusionMatrix, dict]:
    x_train = np.array([_subset_slice(r.vector, subset) for r in train])
    x_test = np.array([_subset_slice(r.vector, subset) for r in test])
    with _stage("training"):
        model = svm.train_multiclass(
            x_train,
            [r.subject for r in train],
            spec,
            tol=cfg.smo_tol,
            max_passes=cfg.smo_max_passes,
        )
    with _stage("evaluation"):
        predicted = svm.predict_many(model, x_test)
        cm = metrics.evaluate([r.subject for r in test], predicted)
        scores = metrics.measures(cm)
    return model, cm, scores


def gallery_means(train: list[FeatureRow]) -> list[tuple[str, np.ndarray]]:
    """Per-subject mean feature vector over the training sequences."""
    by_subject: dict[str, list[np.ndarray]] = {}
    for row in train:
        by_subject.setdefault(row.subject, []).append(row.vector)
    return [(s, np.mean(by_subject[s], axis=0)) for s in sorted(by_subject)]


def write_gallery_csv(gallery: list[tuple[str, np.ndarray]], path) -> None:
    lines = ["subject," + ",".join(feat.FEATURE_NAMES)]
    for subject, mean in gallery:
        lines.append(subject + "," + ",".join(format(v, ".17g") for v in mean))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def nearest_gallery_accuracy(
    gallery: list[tuple[str, np.ndarray]], test: list[FeatureRow], model: svm.SvmModel
) -> float:
    """Sanity baseline: nearest per-subject mean in normalized space."""
    hits = 0
    means = np.array([model.normalize(mean) for _, mean in gallery])
    names = [s for s, _ in gallery]
    for row in test:
        z = model.normalize(row.vector)
        nearest = names[int(np.argmin(((means - z) ** 2).sum(axis=1)))]
        hits += nearest == row.subject
    return hits / len(test)


def _render_config(cfg: PipelineConfig) -> list[str]:
    lines = ["[config]"]
    for f in sorted(fields(cfg), key=lambda f: f.name):
        lines.append(f"{f.name} = {getattr(cfg, f.name)}")
    return lines


def render_confusion(cm: metrics.ConfusionMatrix) -> list[str]:
    lines = ["truth\\predicted," + ",".join(cm.classes)]
    for i, cls in enumerate(cm.classes):
        lines.append(cls + "," + ",".join(str(v) for v in cm.counts[i]))
    return lines


@dataclass
class PipelineResult:
    config: PipelineConfig
    rows: list[FeatureRow]
    train: list[FeatureRow]
    test: list[FeatureRow]
    model: svm.SvmModel
    confusion: metrics.ConfusionMatrix
    scores: dict[str, float]
    nn_accuracy: float
    report: str = ""


def _load_or_extract(cfg: PipelineConfig, resume: bool, out: Path) -> list[FeatureRow]:
    features_path = out / "features.csv"
    if cfg.features_csv:
        return read_features_csv(cfg.features_csv)
    if resume and features_path.exists():
        return read_features_csv(features_path)
    rows = extract_features(cfg)
    write_features_csv(rows, features_path)
    return rows


def run_pipeline(cfg: PipelineConfig, resume: bool = False) -> PipelineResult:
    """Full run: features, split, training, gallery, evaluation, report."""
    cfg.validate()
    out = Path(cfg.out_dir) if cfg.out_dir else None
    if out is None:
        raise ValueError("pipeline needs an out_dir")
    out.mkdir(parents=True, exist_ok=True)
    rows = _load_or_extract(cfg, resume, out)
    train, test = split_rows(rows, cfg.split_fraction, cfg.split_seed)
    model_path = out / "model.svm"
    if resume and model_path.exists():
        model = svm.load_model(model_path)
        with _stage("evaluation"):
            predicted = svm.predict_many(model, np.array([r.vector for r in test]))
            cm = metrics.evaluate([r.subject for r in test], predicted)
            scores = metrics.measures(cm)
    else:
        model, cm, scores = _train_eval(train, test, cfg.kernel_spec(), cfg)
        svm.save_model(model, model_path)
    gallery = gallery_means(train)
    write_gallery_csv(gallery, out / "gallery.csv")
    nn_accuracy = nearest_gallery_accuracy(gallery, test, model)

    lines = ["gaitlock pipeline report", ""]
    lines += _render_config(cfg)
    lines += ["", "[split]"]
    lines.append("train = " + " ".join(f"{r.subject}/{r.sequence}" for r in train))
    lines.append("test = " + " ".join(f"{r.subject}/{r.sequence}" for r in test))
    lines += ["", "[confusion-matrix]"]
    lines += render_confusion(cm)
    lines += ["", "[measures]"]
    for key in ("accuracy", "precision", "recall", "f_measure"):
        lines.append(f"{key} = {scores[key]:.6f}")
    lines.append(f"nn_baseline_accuracy = {nn_accuracy:.6f}")
    report = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(report, encoding="ascii")
    return PipelineResult(cfg, rows, train, test, model, cm, scores, nn_accuracy, report)


def run_ablation(cfg: PipelineConfig, resume: bool = False) -> list[dict]:
    """Train and evaluate one model per feature set, all else fixed."""
    cfg.validate()
    out = Path(cfg.out_dir) if cfg.out_dir else None
    if out is None:
        raise ValueError("ablation needs an out_dir")
    out.mkdir(parents=True, exist_ok=True)
    rows = _load_or_extract(cfg, resume, out)
    train, test = split_rows(rows, cfg.split_fraction, cfg.split_seed)
    results = []
    for name, _ in FEATURE_SETS:
        dim = _subset_slice(rows[0].vector, name).size
        _, _, scores = _train_eval(train, test, cfg.kernel_spec(), cfg, subset=name)
        results.append({"feature_set": name, "dimension": dim, "accuracy": scores["accuracy"]})
    lines = ["feature_set,dimension,accuracy"]
    for r in results:
        lines.append(f"{r['feature_set']},{r['dimension']},{r['accuracy']:.6f}")
    (out / "ablation.csv").write_text("\n".join(lines) + "\n", encoding="ascii")
    return results


def sweep_grid(kernel: str) -> list[svm.KernelSpec]:
    if kernel == svm.KERNEL_LINEAR:
        return [svm.KernelSpec(kernel, c) for c in SWEEP_C]
    if kernel == svm.KERNEL_POLY:
        return [svm.KernelSpec(kernel, c, degree=d) for c in SWEEP_C for d in SWEEP_DEGREE]
    return [svm.KernelSpec(kernel, c, sigma=s) for c in SWEEP_C for s in SWEEP_SIGMA]


def run_kernel_sweep(cfg: PipelineConfig, resume: bool = False) -> list[dict]:
    """Evaluate every grid point per kernel kind; report each kind's best."""
    cfg.validate()
    out = Path(cfg.out_dir) if cfg.out_dir else None
    if out is None:
        raise ValueError("kernel sweep needs an out_dir")
    out.mkdir(parents=True, exist_ok=True)
    rows = _load_or_extract(cfg, resume, out)
    train, test = split_rows(rows, cfg.split_fraction, cfg.split_seed)
    results = []
    for kernel in svm.KERNELS:
        best = None
        evaluations = 0
        for spec in sweep_grid(kernel):
            _, _, scores = _train_eval(train, test, spec, cfg)
            evaluations += 1
            if best is None or scores["accuracy"] > best["accuracy"]:
                best = {
                    "kernel": kernel,
                    "c": spec.c,
                    "degree": spec.degree,
                    "sigma": spec.sigma,
                    "accuracy": scores["accuracy"],
                }
        best["evaluations"] = evaluations
        results.append(best)
    lines = ["kernel,c,degree,sigma,accuracy,evaluations"]
    for r in results:
        degree = "" if r["degree"] is None else str(r["degree"])
        sigma = "" if r["sigma"] is None else format(r["sigma"], "g")
        lines.append(
            f"{r['kernel']},{r['c']:g},{degree},{sigma},{r['accuracy']:.6f},{r['evaluations']}"
        )
    (out / "kernel_sweep.csv").write_text("\n".join(lines) + "\n", encoding="ascii")
    return results
