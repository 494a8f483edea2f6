"""Silhouette extraction: frame differencing, cleanup, bounding boxes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .background import BackgroundModel, otsu_threshold
from .errors import DimensionMismatch
from .imagery import Frame


@dataclass(frozen=True)
class BoundingBox:
    """Tight axis-aligned box over foreground pixels, inclusive coordinates."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"degenerate bounding box {self}")

    @property
    def width(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> int:
        return self.y_max - self.y_min + 1

    def shifted(self, dx: int, dy: int) -> "BoundingBox":
        return BoundingBox(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)


def bounding_box(mask: np.ndarray) -> BoundingBox | None:
    """Tight box over the nonzero pixels, or None for an empty mask."""
    rows = np.flatnonzero(mask.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(mask.any(axis=0))
    return BoundingBox(int(cols[0]), int(rows[0]), int(cols[-1]), int(rows[-1]))


class SilhouetteMask:
    """Binary walker mask for one frame; the bbox is computed on construction."""

    __slots__ = ("mask", "bbox")

    def __init__(self, mask):
        arr = np.asarray(mask)
        if arr.ndim != 2 or arr.size == 0:
            raise DimensionMismatch(f"mask must be a non-empty 2-D grid, got shape {arr.shape}")
        arr = arr.astype(bool)
        self.mask = arr
        self.bbox = bounding_box(arr)

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def empty(self) -> bool:
        return self.bbox is None

    def centroid_x(self) -> float:
        """Mean column of the foreground pixels (NaN when empty)."""
        if self.bbox is None:
            return float("nan")
        return float(np.nonzero(self.mask)[1].mean())

    def to_pixels(self) -> np.ndarray:
        """0/255 uint8 rendering for PGM output."""
        return np.where(self.mask, 255, 0).astype(np.uint8)


def difference_mask(frame: Frame, bg: BackgroundModel, threshold="auto") -> SilhouetteMask:
    """Mark pixels whose absolute difference from the reference exceeds
    the threshold (strictly). ``auto`` chooses the threshold by Otsu
    analysis of this frame's difference image.
    """
    if frame.width != bg.width or frame.height != bg.height:
        raise DimensionMismatch(
            f"frame {frame.width}x{frame.height} vs background {bg.width}x{bg.height}"
        )
    diff = np.abs(frame.pixels.astype(np.int16) - bg.reference.pixels.astype(np.int16))
    if threshold == "auto":
        threshold = otsu_threshold(diff.astype(np.uint8))
    threshold = int(threshold)
    return SilhouetteMask(diff > threshold)


def _majority_vote(mask: np.ndarray) -> np.ndarray:
    # one smoothing pass: each pixel becomes the majority of its 3x3
    # neighbourhood, borders padded with background
    h, w = mask.shape
    padded = np.zeros((h + 2, w + 2), dtype=np.uint8)
    padded[1:-1, 1:-1] = mask
    counts = np.zeros((h, w), dtype=np.uint8)
    for dy in range(3):
        for dx in range(3):
            counts += padded[dy:dy + h, dx:dx + w]
    return counts >= 5


def connected_components(mask: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Label 8-connected foreground components.

    Returns (labels, sizes): labels is int32 with 0 for background and
    1..k for components in scan order; sizes[i] is the pixel count of
    component i+1. Uses row-run union-find, so cost scales with the run
    count rather than the pixel count.
    """
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    parent: list[int] = []
    runs: list[tuple[int, int, int, int]] = []  # (row, start, end, uf index)

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    prev: list[tuple[int, int, int]] = []  # (start, end, uf index) on the row above
    for r in range(h):
        row = mask[r]
        if not row.any():
            prev = []
            continue
        edges = np.flatnonzero(np.diff(np.concatenate(([False], row, [False]))))
        cur: list[tuple[int, int, int]] = []
        pi = 0
        for s, e in zip(edges[0::2], edges[1::2]):  # run covers columns [s, e)
            uf = -1
            # 8-connectivity: the run touches prev runs overlapping [s-1, e]
            while pi < len(prev) and prev[pi][1] < s:  # pe < s: ends left of touch zone
                pi += 1
            pj = pi
            while pj < len(prev) and prev[pj][0] <= e:  # ps <= e: starts inside touch zone
                root = find(prev[pj][2])
                if uf == -1:
                    uf = root
                elif root != uf:
                    parent[root] = find(uf)
                pj += 1
            if uf == -1:
                uf = len(parent)
                parent.append(uf)
            else:
                uf = find(uf)
            cur.append((int(s), int(e), uf))
            runs.append((r, int(s), int(e), uf))
        prev = cur

    compact: dict[int, int] = {}
    sizes: list[int] = []
    for r, s, e, uf in runs:
        root = find(uf)
        label = compact.get(root)
        if label is None:
            label = len(compact) + 1
            compact[root] = label
            sizes.append(0)
        sizes[label - 1] += e - s
        labels[r, s:e] = label
    return labels, sizes


def largest_component(mask: np.ndarray) -> np.ndarray:
    """Keep only the biggest 8-connected foreground component (ties: first
    in scan order)."""
    labels, sizes = connected_components(mask)
    if not sizes:
        return np.zeros_like(mask, dtype=bool)
    keep = int(np.argmax(sizes)) + 1
    return labels == keep


def clean_mask(raw: SilhouetteMask) -> SilhouetteMask:
    """One majority-vote smoothing pass, then largest-component selection."""
    smoothed = _majority_vote(raw.mask)
    return SilhouetteMask(largest_component(smoothed))
