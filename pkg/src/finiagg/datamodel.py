"""Core domain types: labeled samples, datasets, and ensemble configuration.

Training data is a multiset of integer feature vectors with class labels.
All types are immutable and hashable, so they can be shared freely across
worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DataError, LabelOutOfRange, NegativeFeature, RaggedRow


@dataclass(frozen=True, order=True)
class LabeledSample:
    """One training sample: non-negative integer features plus a class label.

    The declared field order (features first, label last) is the canonical
    lexicographic order used everywhere partitions are serialized for
    training.
    """

    features: tuple[int, ...]
    label: int


@dataclass(frozen=True)
class Dataset:
    """A multiset of samples with fixed feature width and class count."""

    samples: tuple[LabeledSample, ...]
    n_classes: int
    feature_dim: int

    def __post_init__(self):
        if self.n_classes < 1:
            raise DataError(f"n_classes must be positive, got {self.n_classes}")
        if self.feature_dim < 1:
            raise DataError(f"feature_dim must be positive, got {self.feature_dim}")
        for s in self.samples:
            if len(s.features) != self.feature_dim:
                raise DataError(f"sample has {len(s.features)} features, expected {self.feature_dim}")
            if s.label < 0 or s.label >= self.n_classes:
                raise DataError(f"sample label {s.label} outside [0, {self.n_classes})")
            if any(v < 0 for v in s.features):
                raise DataError("sample has a negative feature")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class AggregationConfig:
    """Hyperparameters of the split/spread ensemble.

    ``k`` is the inverse sensitivity (each sample reaches a 1/k fraction of
    the classifiers), ``d`` the spread degree (how many classifiers consume
    each partition). The ensemble has ``kd = k * d`` partitions and equally
    many base classifiers. ``seed`` pins the offset generator.
    """

    k: int
    d: int
    seed: int
    n_classes: int

    def __post_init__(self):
        if self.k < 1:
            raise DataError(f"k must be positive, got {self.k}")
        if self.d < 1:
            raise DataError(f"d must be positive, got {self.d}")
        if self.n_classes < 1:
            raise DataError(f"n_classes must be positive, got {self.n_classes}")

    @property
    def kd(self) -> int:
        return self.k * self.d


def validate_dataset(
    rows: Iterable[Sequence[int]],
    n_classes: int | None = None,
    feature_dim: int | None = None,
) -> Dataset:
    """Build a ``Dataset`` from parsed rows of ``(label, f0, ..., f{n-1})``.

    ``n_classes`` defaults to ``max(label) + 1``; ``feature_dim`` to the width
    of the first row (callers that parsed a CSV header pass it explicitly, so
    even empty files validate). Errors name the offending zero-based row index.
    """
    samples: list[LabeledSample] = []
    max_label = -1
    for idx, row in enumerate(rows):
        label = int(row[0])
        features = tuple(int(v) for v in row[1:])
        if feature_dim is None:
            feature_dim = len(features)
        if len(features) != feature_dim:
            raise RaggedRow(idx, feature_dim, len(features))
        for col, value in enumerate(features):
            if value < 0:
                raise NegativeFeature(idx, col, value)
        if label < 0 or (n_classes is not None and label >= n_classes):
            raise LabelOutOfRange(idx, label, n_classes if n_classes is not None else 0)
        max_label = max(max_label, label)
        samples.append(LabeledSample(features, label))

    if n_classes is None:
        if max_label < 0:
            raise DataError("empty dataset needs an explicit n_classes")
        n_classes = max_label + 1
    if feature_dim is None:
        raise DataError("cannot infer feature_dim from an empty dataset")
    return Dataset(tuple(samples), n_classes, feature_dim)


def canonical_sort(samples: Iterable[LabeledSample]) -> tuple[LabeledSample, ...]:
    """Order a sample multiset lexicographically by (features, label).

    The result is independent of the input order, which removes any
    dependence of downstream training on how partitions were accumulated.
    Duplicates are preserved (multiset semantics).
    """
    return tuple(sorted(samples, key=lambda s: (s.features, s.label)))
