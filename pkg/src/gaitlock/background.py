"""Static-scene background modelling from a training sequence.

Three per-pixel reference estimators are provided: an inter-frame change
analysis (``cdm``), the temporal median, and the dominant histogram bin.
All three assume a fixed camera and return an 8-bit reference image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewFrames
from .imagery import Frame, FrameSequence, read_pnm, write_pgm

TECHNIQUE_CDM = "cdm"
TECHNIQUE_MEDIAN = "median"
TECHNIQUE_HISTOGRAM = "histogram"
TECHNIQUES = (TECHNIQUE_CDM, TECHNIQUE_MEDIAN, TECHNIQUE_HISTOGRAM)

# above this many distinct intensities the sparse mode counter loses to a
# dense per-pixel histogram
_SPARSE_VALUE_LIMIT = 64


@dataclass(frozen=True)
class BackgroundModel:
    """Per-pixel reference image plus the technique that produced it.

    ``cdm_threshold`` records the inter-frame change threshold actually
    used; it is None for the median and histogram techniques and for
    models reloaded from files that carry no provenance.
    """

    reference: Frame
    technique: str | None
    cdm_threshold: int | None = None

    @property
    def width(self) -> int:
        return self.reference.width

    @property
    def height(self) -> int:
        return self.reference.height


def otsu_threshold(values) -> int:
    """Otsu split point for 8-bit data: classes are ``<= t`` and ``> t``.

    Maximizes the between-class variance of the 256-bin histogram. On a
    degenerate single-valued input the value itself is returned, so the
    foreground class ``> t`` stays empty.
    """
    arr = np.asarray(values, dtype=np.uint8).ravel()
    if arr.size == 0:
        raise ValueError("otsu_threshold needs at least one value")
    hist = np.bincount(arr, minlength=256).astype(np.float64)
    prob = hist / hist.sum()
    omega = np.cumsum(prob)
    mu = np.cumsum(prob * np.arange(256))
    mu_total = mu[-1]
    valid = (omega > 0.0) & (omega < 1.0)
    if not valid.any():
        return int(arr[0])
    sigma_b = np.zeros(256)
    sigma_b[valid] = (mu_total * omega[valid] - mu[valid]) ** 2 / (
        omega[valid] * (1.0 - omega[valid])
    )
    return int(np.argmax(sigma_b))


def _lower_median(sorted_stack: np.ndarray) -> np.ndarray:
    # lower middle order statistic: avoids blending two pixel values on
    # even counts
    n = sorted_stack.shape[0]
    return sorted_stack[(n - 1) // 2]


def model_median(seq: FrameSequence) -> BackgroundModel:
    """Per-pixel temporal median of the whole sequence.

    Exact whenever the true background is visible at a pixel in strictly
    more than half of the frames. Even frame counts take the lower of the
    two middle order statistics.
    """
    stack = np.sort(seq.stack(), axis=0)
    return BackgroundModel(Frame(_lower_median(stack)), TECHNIQUE_MEDIAN)


def model_histogram(seq: FrameSequence) -> BackgroundModel:
    """Per-pixel modal intensity over a 256-bin histogram.

    Ties between equally frequent intensities resolve to the lowest one.
    Counting runs over the distinct intensities actually present (sampled
    candidates with an exact per-pixel fallback); sequences with many
    distinct values fall back to dense per-pixel histograms.
    """
    stack = seq.stack()
    n, h, w = stack.shape
    p = h * w
    flat = stack.reshape(n, p)
    candidates = np.unique(flat[:, :: max(1, min(61, p))])
    count_dtype = np.uint16 if n < 65535 else np.int64
    if candidates.size <= _SPARSE_VALUE_LIMIT:
        best_count = np.zeros(p, dtype=count_dtype)
        best_val = np.zeros(p, dtype=np.uint8)
        covered = np.zeros(p, dtype=count_dtype)
        for v in candidates:  # ascending, strict '>' keeps ties at the low value
            cnt = (flat == v).sum(axis=0, dtype=count_dtype)
            better = cnt > best_count
            best_val[better] = v
            best_count[better] = cnt[better]
            covered += cnt
        for col in np.flatnonzero(covered < n):
            best_val[col] = np.bincount(flat[:, col], minlength=256).argmax()
        reference = best_val.reshape(h, w)
    else:
        codes = flat.astype(np.int64) + np.arange(p, dtype=np.int64) * 256
        counts = np.bincount(codes.ravel(), minlength=p * 256).reshape(p, 256)
        reference = counts.argmax(axis=1).astype(np.uint8).reshape(h, w)
    return BackgroundModel(Frame(reference), TECHNIQUE_HISTOGRAM)


def model_cdm(seq: FrameSequence, threshold="auto") -> BackgroundModel:
    """Change-analysis background: per pixel, the median of the longest
    run of consecutive unchanged frames.

    A change fires between frames i and i+1 wherever the absolute
    intensity difference reaches the threshold; runs break exactly at
    firing transitions. Ties between equal-length runs go to the earlier
    run. ``threshold="auto"`` picks the value by Otsu analysis of the
    pooled inter-frame absolute differences.
    """
    if len(seq) < 2:
        raise TooFewFrames("change analysis needs at least 2 frames")
    stack = seq.stack()
    n, h, w = stack.shape
    p = h * w
    diffs = np.abs(np.diff(stack.astype(np.int16), axis=0))
    if threshold == "auto":
        # Otsu yields classes <= t / > t; fire on the '> t' class
        t = otsu_threshold(diffs.astype(np.uint8))
        threshold = t + 1
    threshold = int(threshold)
    if not 0 <= threshold <= 255:
        raise ValueError("cdm threshold must lie in [0, 255]")
    fired = diffs >= threshold
    run_id = np.zeros((n, p), dtype=np.int64)
    run_id[1:] = np.cumsum(fired.reshape(n - 1, p), axis=0)
    n_runs = int(run_id[-1].max()) + 1
    codes = np.arange(p, dtype=np.int64) * n_runs + run_id
    counts = np.bincount(codes.ravel(), minlength=p * n_runs).reshape(p, n_runs)
    best = counts.argmax(axis=1)  # first maximum: earlier run wins ties
    selected = run_id == best
    lengths = selected.sum(axis=0)
    vals = np.where(selected, stack.reshape(n, p).astype(np.int16), 256)
    vals.sort(axis=0)
    median = np.take_along_axis(vals, ((lengths - 1) // 2)[None, :], axis=0)[0]
    reference = median.astype(np.uint8).reshape(h, w)
    return BackgroundModel(Frame(reference), TECHNIQUE_CDM, cdm_threshold=threshold)


def build_background(seq: FrameSequence, technique: str, threshold="auto") -> BackgroundModel:
    if technique == TECHNIQUE_MEDIAN:
        return model_median(seq)
    if technique == TECHNIQUE_HISTOGRAM:
        return model_histogram(seq)
    if technique == TECHNIQUE_CDM:
        return model_cdm(seq, threshold)
    raise ValueError(f"unknown background technique: {technique!r}")


def save_background(model: BackgroundModel, path) -> None:
    """Emit the reference as P5 PGM, provenance in a header comment."""
    comment = f"gaitlock-background technique={model.technique or 'unknown'}"
    if model.cdm_threshold is not None:
        comment += f" threshold={model.cdm_threshold}"
    write_pgm(path, model.reference.pixels, comment=comment)


def load_background(path) -> BackgroundModel:
    """Reload a reference image; provenance restored from the comment if present."""
    pixels, comments = read_pnm(path)
    technique = None
    cdm_threshold = None
    for line in comments:
        if line.startswith("gaitlock-background"):
            for field in line.split()[1:]:
                key, _, value = field.partition("=")
                if key == "technique" and value in TECHNIQUES:
                    technique = value
                elif key == "threshold":
                    cdm_threshold = int(value)
    return BackgroundModel(Frame(pixels), technique, cdm_threshold)
