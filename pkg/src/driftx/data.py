"""Point sets with optional class labels, and their CSV file format.

The on-disk format is a plain CSV with header ``class,x0,x1,...,x{D-1}``.
The ``class`` column may be empty on every row (unconditional data); when
present it must be a non-negative integer on every row. Parsing is strict:
each row must have exactly as many fields as the header.
"""

import csv

import numpy as np

from .serialize import fmt_float


class FeatureSet:
    """N points in R^D, optionally tagged with class indices.

    points : (N, D) float64 array, every coordinate finite, N >= 1, D >= 1
    labels : (N,) int64 array of non-negative class indices, or None
    """

    __slots__ = ("points", "labels")

    def __init__(self, points, labels=None):
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise ValueError(f"points must be a non-empty 2D array, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise ValueError("points contain non-finite coordinates")
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (points.shape[0],):
                raise ValueError(
                    f"labels length {labels.shape} does not match {points.shape[0]} points"
                )
            if np.any(labels < 0):
                raise ValueError("labels must be non-negative class indices")
        self.points = points
        self.labels = labels

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def num_classes(self):
        return None if self.labels is None else int(self.labels.max()) + 1

    def class_ids(self):
        if self.labels is None:
            raise ValueError("feature set has no labels")
        return sorted(int(c) for c in np.unique(self.labels))

    def class_indices(self, class_id: int) -> np.ndarray:
        if self.labels is None:
            raise ValueError("feature set has no labels")
        return np.flatnonzero(self.labels == class_id)

    def subset(self, indices) -> "FeatureSet":
        indices = np.asarray(indices)
        labels = None if self.labels is None else self.labels[indices]
        return FeatureSet(self.points[indices], labels)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        tag = "unlabeled" if self.labels is None else f"{self.num_classes} classes"
        return f"FeatureSet(n={self.n}, dim={self.dim}, {tag})"


def as_points(obj) -> np.ndarray:
    """Accept a FeatureSet or raw array and return the (N, D) array."""
    if isinstance(obj, FeatureSet):
        return obj.points
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def csv_header(dim: int) -> list:
    return ["class"] + [f"x{i}" for i in range(dim)]


def save_csv(data: FeatureSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_header(data.dim))
        for i in range(data.n):
            tag = "" if data.labels is None else str(int(data.labels[i]))
            writer.writerow([tag] + [fmt_float(v) for v in data.points[i]])


def load_csv(path) -> FeatureSet:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        dim = len(header) - 1
        if dim < 1 or header != csv_header(dim):
            raise ValueError(f"{path}: malformed header {header!r}")
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            labels.append(row[0].strip())
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
        if not rows:
            raise ValueError(f"{path}: no data rows")
        blank = [t == "" for t in labels]
        if all(blank):
            return FeatureSet(np.array(rows))
        if any(blank):
            raise ValueError(f"{path}: class column must be all empty or all set")
        try:
            parsed = [int(t) for t in labels]
        except ValueError:
            raise ValueError(f"{path}: class column must hold integers") from None
        return FeatureSet(np.array(rows), parsed)
