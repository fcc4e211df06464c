"""Embedding datasets: CSV ingest, label-stratified sampling and synthetic blobs."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    pool_size: int = 20000
    test_size: int = 5000
    validation_fraction: float = 0.2

    def __post_init__(self):
        if self.pool_size <= 0:
            raise DatasetError("pool_size must be positive")
        if self.test_size < 0:
            raise DatasetError("test_size must be non-negative")
        if not 0.0 < self.validation_fraction < 1.0:
            raise DatasetError("validation_fraction must lie in (0, 1)")


@dataclass(eq=False)
class DatasetBundle:
    """Feature matrix plus dense integer labels ``0..class_count-1``.

    ``label_names[c]`` is the original label string of class ``c``.
    """

    id: str
    features: np.ndarray
    labels: np.ndarray
    class_count: int
    label_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[1] == 0:
            raise DatasetError("features must be a 2-d matrix with at least one column")
        if self.features.shape[0] != self.labels.shape[0]:
            raise DatasetError("features row count differs from labels length")
        if self.class_count < 2:
            raise DatasetError("fewer than 2 classes")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
            raise DatasetError("label outside 0..class_count-1")
        if not self.label_names:
            self.label_names = tuple(str(c) for c in range(self.class_count))

    def __len__(self):
        return self.labels.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    def subset(self, index, id=None):
        """Rows ``index`` as a new bundle (class ids are kept, not re-encoded)."""
        index = np.asarray(index, dtype=np.int64)
        return DatasetBundle(id or self.id, self.features[index], self.labels[index],
                             self.class_count, self.label_names)

    def __eq__(self, other):
        if not isinstance(other, DatasetBundle):
            return NotImplemented
        return (self.class_count == other.class_count
                and self.label_names == other.label_names
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.features, other.features))


def load_table(path, format="csv", id=None):
    """Read a ``label,feat_0..feat_{d-1}`` CSV file.

    Labels are re-encoded densely in order of first appearance.
    """
    if format != "csv":
        raise DatasetError(f"unsupported format {format!r}")
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"missing file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        dim = len(header) - 1
        expected = ["label"] + [f"feat_{j}" for j in range(dim)]
        if dim < 1 or [h.strip() for h in header] != expected:
            raise DatasetError(f"{path}: header must be label,feat_0..feat_{{d-1}}")
        codes: dict[str, int] = {}
        labels, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise DatasetError(f"{path}:{lineno}: ragged row ({len(row) - 1} features, expected {dim})")
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError:
                raise DatasetError(f"{path}:{lineno}: non-numeric feature cell") from None
            labels.append(codes.setdefault(row[0], len(codes)))
    if len(codes) < 2:
        raise DatasetError(f"{path}: fewer than 2 classes")
    return DatasetBundle(
        id or path.stem,
        np.array(rows, dtype=np.float64).reshape(len(rows), dim),
        np.array(labels, dtype=np.int64),
        len(codes),
        tuple(codes),
    )


def write_table(bundle, path):
    """Write ``bundle`` in the format read by :func:`load_table`."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label"] + [f"feat_{j}" for j in range(bundle.dim)])
        for lab, row in zip(bundle.labels, bundle.features):
            w.writerow([bundle.label_names[lab]] + [repr(float(v)) for v in row])


def largest_remainder(quotas, total, caps=None, denominator=None):
    """Integer allocation summing to ``total`` (at most ``caps``).

    Floors first, then one extra unit per slot by descending fractional part,
    ties to the lower slot index. With ``denominator`` the quotas are the
    integer numerators ``quotas / denominator``, which keeps equal fractional
    parts exactly equal.
    """
    if denominator is None:
        quotas = np.asarray(quotas, dtype=np.float64)
        alloc = np.floor(quotas).astype(np.int64)
        frac = quotas - np.floor(quotas)
    else:
        quotas = np.asarray(quotas, dtype=np.int64)
        alloc, frac = np.divmod(quotas, int(denominator))
    if caps is not None:
        caps = np.asarray(caps, dtype=np.int64)
        alloc = np.minimum(alloc, caps)
    rest = total - int(alloc.sum())
    for c in sorted(range(len(quotas)), key=lambda c: (-frac[c], c)):
        if rest <= 0:
            break
        if caps is not None and alloc[c] >= caps[c]:
            continue
        alloc[c] += 1
        rest -= 1
    return alloc


def stratified_indices(labels, size, rng, class_count=None):
    """Row indices (ascending) of a label-stratified sample of ``size`` rows."""
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    if class_count is None:
        class_count = int(labels.max()) + 1
    if size > n:
        raise DatasetError(f"sample size {size} exceeds population {n}")
    if size < class_count:
        raise DatasetError(f"sample size {size} smaller than class_count {class_count}")
    counts = np.bincount(labels, minlength=class_count)
    alloc = largest_remainder(counts * size, size, denominator=n)
    picked = []
    for c in range(class_count):
        members = np.flatnonzero(labels == c)
        if alloc[c]:
            picked.append(rng.choice(members, size=int(alloc[c]), replace=False))
    return np.sort(np.concatenate(picked)) if picked else np.empty(0, dtype=np.int64)


def stratified_sample(bundle, size, rng):
    return bundle.subset(stratified_indices(bundle.labels, size, rng, bundle.class_count))


def label_entropy(labels, class_count):
    """Base-``class_count`` entropy of the empirical label distribution."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise DatasetError("label_entropy of empty input")
    p = np.bincount(labels, minlength=class_count) / labels.size
    p = p[p > 0]
    h = float(-(p * np.log(p)).sum() / math.log(class_count))
    return min(max(h, 0.0), 1.0)


def split_validation(labeled_indices, labels, fraction, rng):
    """Label-stratified hold-out split of a labeled set.

    Every class with two or more members keeps at least one member in train;
    singleton classes stay entirely in train. Returns ``(train, validation)``
    as ascending arrays of the given index values.
    """
    labeled_indices = np.asarray(labeled_indices, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if labeled_indices.size == 0:
        raise DatasetError("split_validation of empty input")
    if not 0.0 < fraction < 1.0:
        raise DatasetError("fraction must lie in (0, 1)")
    classes = np.unique(labels)
    counts = np.array([np.count_nonzero(labels == c) for c in classes])
    total = int(math.floor(fraction * labeled_indices.size + 0.5))
    alloc = largest_remainder(counts * fraction, total, caps=counts - 1)
    val = []
    for c, k in zip(classes, alloc):
        if k:
            members = labeled_indices[labels == c]
            val.append(rng.choice(members, size=int(k), replace=False))
    validation = np.sort(np.concatenate(val)) if val else np.empty(0, dtype=np.int64)
    train = np.setdiff1d(labeled_indices, validation)
    return train, validation


def simplex_means(class_count, dim, separation):
    """Class means pairwise ``separation`` apart (regular simplex in ``class_count-1`` dims)."""
    if dim < class_count - 1:
        raise DatasetError(f"dim must be at least class_count-1 = {class_count - 1}")
    eye = np.eye(class_count) - 1.0 / class_count
    # orthonormal basis of the sum-zero subspace
    basis, _ = np.linalg.qr(eye[:, :class_count - 1])
    verts = eye @ basis
    verts *= separation / math.sqrt(2.0)
    means = np.zeros((class_count, dim))
    means[:, :class_count - 1] = verts
    return means


def make_blobs(class_count, dim, per_class, separation, rng, id="blobs"):
    """Unit-variance Gaussian clusters whose means are mutually ``separation`` apart."""
    if class_count < 2 or dim < 1 or per_class < 1:
        raise DatasetError("need class_count >= 2, dim >= 1, per_class >= 1")
    means = simplex_means(class_count, dim, separation)
    labels = np.repeat(np.arange(class_count), per_class)
    features = means[labels] + rng.standard_normal((labels.size, dim))
    return DatasetBundle(id, features, labels, class_count)
