"""Ensemble training, vote collection, and aggregated prediction.

The vote matrix is the sole input to every certificate downstream: row t
holds the ``kd`` class votes for test input t, one per base classifier.
Votes are kept as a dense table (not per-class counts) because the
certificates need per-partition counts, which require knowing which
classifier cast each vote.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._parallel import ordered_map
from .datamodel import AggregationConfig, Dataset
from .errors import DataError, DimensionMismatch, EmptyTestSet, MissingLabels
from .hashing import SpreadOffsets, build_partitions, build_subsets, generate_offsets
from .learners import LearnerSpec, TrainedModel, train


@dataclass(frozen=True)
class VoteMatrix:
    """n_test x kd class votes plus the metadata needed to certify them."""

    votes: tuple[tuple[int, ...], ...]
    config: AggregationConfig
    offsets: SpreadOffsets
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        kd = self.config.kd
        if self.offsets.kd != kd:
            raise DataError(f"offsets kd={self.offsets.kd} does not match config kd={kd}")
        for t, row in enumerate(self.votes):
            if len(row) != kd:
                raise DimensionMismatch(f"vote row {t} has {len(row)} entries, expected {kd}")
            for v in row:
                if v < 0 or v >= self.config.n_classes:
                    raise DataError(f"vote row {t}: class {v} outside [0, {self.config.n_classes})")
        if self.labels is not None:
            if len(self.labels) != len(self.votes):
                raise DimensionMismatch(
                    f"{len(self.labels)} labels for {len(self.votes)} vote rows"
                )
            for t, lab in enumerate(self.labels):
                if lab < 0 or lab >= self.config.n_classes:
                    raise DataError(f"label {t}: class {lab} outside [0, {self.config.n_classes})")

    @property
    def n_test(self) -> int:
        return len(self.votes)


@dataclass(frozen=True)
class EnsembleStats:
    clean_accuracy: Fraction
    base_accuracy: Fraction


def train_ensemble(
    dataset: Dataset,
    config: AggregationConfig,
    spec: LearnerSpec,
    offsets: SpreadOffsets | None = None,
    workers: int = 1,
) -> list[TrainedModel]:
    """Train the ``kd`` base models, one per training subset.

    Model ``i`` is always the one trained on subset ``S_i`` no matter how the
    work is scheduled.
    """
    if offsets is None:
        offsets = generate_offsets(config.k, config.d, config.seed)
    layout = build_subsets(build_partitions(dataset, config), offsets)
    return ordered_map(
        lambda subset: train(spec, subset, config.n_classes), layout.subsets, workers
    )


def collect_votes(
    models: Sequence[TrainedModel],
    test_inputs: Sequence[Sequence[int]],
    config: AggregationConfig,
    offsets: SpreadOffsets,
    labels: Sequence[int] | None = None,
    workers: int = 1,
) -> VoteMatrix:
    """Evaluate every model on every test input."""
    if len(models) != config.kd:
        raise DimensionMismatch(f"{len(models)} models for kd={config.kd}")
    rows = ordered_map(
        lambda x: tuple(m.predict(x) for m in models), test_inputs, workers
    )
    return VoteMatrix(
        tuple(rows), config, offsets, tuple(labels) if labels is not None else None
    )


def aggregate_prediction(row: Sequence[int], n_classes: int) -> int:
    """Majority vote over one row; ties go to the smaller class index."""
    counts = [0] * n_classes
    for v in row:
        counts[v] += 1
    best = 0
    for c in range(1, n_classes):
        if counts[c] > counts[best]:
            best = c
    return best


def ensemble_stats(matrix: VoteMatrix) -> EnsembleStats:
    """Clean accuracy of the aggregate and mean accuracy of the base models."""
    if matrix.labels is None:
        raise MissingLabels("ensemble statistics")
    n = matrix.n_test
    if n == 0:
        raise EmptyTestSet()
    kd = matrix.config.kd
    n_classes = matrix.config.n_classes
    clean_hits = 0
    base_hits = 0
    for row, label in zip(matrix.votes, matrix.labels):
        if aggregate_prediction(row, n_classes) == label:
            clean_hits += 1
        base_hits += sum(1 for v in row if v == label)
    return EnsembleStats(Fraction(clean_hits, n), Fraction(base_hits, n * kd))
