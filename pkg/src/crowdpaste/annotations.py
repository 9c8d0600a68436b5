"""Bounding-box geometry, connected-component extraction, and YOLO label files.

Binary masks are 2-D boolean numpy arrays (row-major, True = foreground).
Label files are plain text, one object per line: ``class x_center y_center w h``
with all coordinates normalized to [0, 1] and written with six fractional
digits so files are byte-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "BoundingBox",
    "NormalizedLabel",
    "Component",
    "LabelFormatError",
    "label_components",
    "extract_components",
    "to_normalized",
    "clip_box",
    "write_labels",
    "read_labels",
    "read_normalized_labels",
    "iou",
]

DEFAULT_MIN_AREA = 9


class LabelFormatError(ValueError):
    """Raised when a label file line cannot be parsed."""


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel rectangle; ``width``/``height`` are at least 1."""

    x_min: int
    y_min: int
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"box must have positive size, got {self}")
        if self.x_min < 0 or self.y_min < 0:
            raise ValueError(f"box origin must be non-negative, got {self}")

    @property
    def x_max(self) -> int:
        """Exclusive right edge."""
        return self.x_min + self.width

    @property
    def y_max(self) -> int:
        """Exclusive bottom edge."""
        return self.y_min + self.height

    @property
    def area(self) -> int:
        return self.width * self.height

    def contains_point(self, x: int, y: int) -> bool:
        return self.x_min <= x < self.x_max and self.y_min <= y < self.y_max


@dataclass(frozen=True)
class NormalizedLabel:
    """One YOLO label line: class id plus fractional center/size coordinates."""

    class_id: int
    x_center: float
    y_center: float
    w: float
    h: float


@dataclass(frozen=True)
class Component:
    """A connected foreground component: its label-image value, hull, and pixel count."""

    label: int
    box: BoundingBox
    area: int


def _row_runs(row: np.ndarray) -> list[tuple[int, int]]:
    """Half-open [start, end) runs of True cells in a 1-D boolean row."""
    idx = np.flatnonzero(np.diff(row.astype(np.int8)))
    bounds = idx + 1
    starts = bounds[::2] if not row[0] else np.concatenate(([0], bounds[1::2]))
    ends = bounds[1::2] if not row[0] else bounds[::2]
    if row[-1]:
        ends = np.concatenate((ends, [row.shape[0]]))
    return list(zip(starts.tolist(), ends.tolist()))


class _UnionFind:
    def __init__(self) -> None:
        self.parent: list[int] = []

    def make(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def label_components(
    mask: np.ndarray, connectivity: int = 8
) -> tuple[np.ndarray, list[Component]]:
    """Label connected foreground components of a binary mask.

    Uses run-length encoding per row with union-find across adjacent rows,
    so cost scales with the number of runs rather than pixels.

    Args:
        mask: 2-D boolean array (truthy values are treated as foreground).
        connectivity: 4 or 8.

    Returns:
        ``(labels, components)`` where ``labels`` is an int32 array with 0 for
        background and 1..n for components, and ``components`` lists every
        component sorted by (y_min, x_min) of its bounding box.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    mask = np.asarray(mask).astype(bool)
    if mask.ndim != 2 or mask.shape[0] < 1 or mask.shape[1] < 1:
        raise ValueError(f"mask must be a non-empty 2-D array, got shape {mask.shape}")

    height, width = mask.shape
    labels = np.zeros((height, width), dtype=np.int32)
    uf = _UnionFind()
    all_runs: list[tuple[int, int, int, int]] = []  # (y, start, end, run_id)
    reach = 1 if connectivity == 8 else 0

    prev_runs: list[tuple[int, int, int]] = []  # (start, end, run_id)
    for y in range(height):
        if not mask[y].any():
            prev_runs = []
            continue
        cur_runs: list[tuple[int, int, int]] = []
        pi = 0
        for start, end in _row_runs(mask[y]):
            rid = uf.make()
            labels[y, start:end] = rid + 1
            all_runs.append((y, start, end, rid))
            cur_runs.append((start, end, rid))
            # prev runs ending before our reach cannot touch this or later runs
            while pi < len(prev_runs) and prev_runs[pi][1] + reach <= start:
                pi += 1
            j = pi
            while j < len(prev_runs) and prev_runs[j][0] < end + reach:
                uf.union(prev_runs[j][2], rid)
                j += 1
        prev_runs = cur_runs

    # Aggregate per-root extents, then order components by (y_min, x_min).
    extents: dict[int, list[int]] = {}  # root -> [x_min, x_max, y_min, y_max, area]
    for y, start, end, rid in all_runs:
        root = uf.find(rid)
        ext = extents.get(root)
        if ext is None:
            extents[root] = [start, end, y, y, end - start]
        else:
            ext[0] = min(ext[0], start)
            ext[1] = max(ext[1], end)
            ext[3] = y
            ext[4] += end - start

    ordered = sorted(extents.items(), key=lambda kv: (kv[1][2], kv[1][0]))
    components = []
    final_of_root = {}
    for index, (root, (x0, x1, y0, y1, area)) in enumerate(ordered, start=1):
        final_of_root[root] = index
        components.append(
            Component(index, BoundingBox(x0, y0, x1 - x0, y1 - y0 + 1), area)
        )

    if all_runs:
        lut = np.zeros(len(uf.parent) + 1, dtype=np.int32)
        for rid in range(len(uf.parent)):
            lut[rid + 1] = final_of_root[uf.find(rid)]
        labels = lut[labels]
    return labels, components


def extract_components(
    mask: np.ndarray, connectivity: int = 8, min_area: int = DEFAULT_MIN_AREA
) -> list[BoundingBox]:
    """Tight bounding boxes of foreground components, sorted by (y_min, x_min).

    Components with fewer than ``min_area`` foreground pixels are dropped.
    """
    _, components = label_components(mask, connectivity)
    return [c.box for c in components if c.area >= min_area]


def to_normalized(
    box: BoundingBox, image_w: int, image_h: int, class_id: int
) -> NormalizedLabel:
    """Convert a pixel box to a normalized label; the box must fit the image."""
    if box.x_max > image_w or box.y_max > image_h:
        raise ValueError(
            f"box {box} exceeds image bounds {image_w}x{image_h}"
        )
    return NormalizedLabel(
        class_id=class_id,
        x_center=(box.x_min + box.width / 2) / image_w,
        y_center=(box.y_min + box.height / 2) / image_h,
        w=box.width / image_w,
        h=box.height / image_h,
    )


def clip_box(box: BoundingBox, image_w: int, image_h: int) -> BoundingBox | None:
    """Intersect a box with the image frame; None when nothing remains."""
    x0 = max(box.x_min, 0)
    y0 = max(box.y_min, 0)
    x1 = min(box.x_max, image_w)
    y1 = min(box.y_max, image_h)
    if x1 <= x0 or y1 <= y0:
        return None
    return BoundingBox(x0, y0, x1 - x0, y1 - y0)


def write_labels(labels: list[NormalizedLabel], destination: Path | str) -> None:
    """Write labels one per line; six fractional digits, newline-terminated."""
    lines = [
        f"{lab.class_id} {lab.x_center:.6f} {lab.y_center:.6f} {lab.w:.6f} {lab.h:.6f}\n"
        for lab in labels
    ]
    Path(destination).write_text("".join(lines))


def _parse_line(line: str, lineno: int, source: str) -> NormalizedLabel:
    fields = line.split()
    if len(fields) != 5:
        raise LabelFormatError(
            f"{source}: line {lineno}: expected 5 fields, got {len(fields)}"
        )
    try:
        class_id = int(fields[0])
        values = [float(f) for f in fields[1:]]
    except ValueError as exc:
        raise LabelFormatError(f"{source}: line {lineno}: {exc}") from exc
    if class_id < 0:
        raise LabelFormatError(f"{source}: line {lineno}: negative class id")
    return NormalizedLabel(class_id, *values)


def read_normalized_labels(source: Path | str) -> list[NormalizedLabel]:
    """Parse a label file without denormalizing; preserves line order."""
    labels = []
    with open(source) as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            labels.append(_parse_line(line, lineno, str(source)))
    return labels


def read_labels(source: Path | str, image_w: int, image_h: int) -> list[BoundingBox]:
    """Read a label file and denormalize to pixel boxes (nearest-integer)."""
    boxes = []
    for lab in read_normalized_labels(source):
        cx = lab.x_center * image_w
        cy = lab.y_center * image_h
        bw = lab.w * image_w
        bh = lab.h * image_h
        width = max(1, min(int(math.floor(bw + 0.5)), image_w))
        height = max(1, min(int(math.floor(bh + 0.5)), image_h))
        x_min = min(max(int(math.floor(cx - bw / 2 + 0.5)), 0), image_w - width)
        y_min = min(max(int(math.floor(cy - bh / 2 + 0.5)), 0), image_h - height)
        boxes.append(BoundingBox(x_min, y_min, width, height))
    return boxes


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes; 0.0 when disjoint."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)
