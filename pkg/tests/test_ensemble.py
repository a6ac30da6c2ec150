from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from finiagg import (
    AggregationConfig,
    LearnerSpec,
    VoteMatrix,
    aggregate_prediction,
    build_partitions,
    canonical_sort,
    collect_votes,
    ensemble_stats,
    predict,
    train,
    train_ensemble,
    validate_dataset,
)
from finiagg.datamodel import Dataset
from finiagg.errors import DataError, DimensionMismatch, EmptyTestSet, MissingLabels
from finiagg.hashing import SpreadOffsets

MAJORITY = LearnerSpec("majority-label")


def _toy_dataset():
    rows = [(i % 2, i, (3 * i) % 5) for i in range(14)]
    return validate_dataset(rows)


def test_d1_models_equal_per_partition_models():
    ds = _toy_dataset()
    config = AggregationConfig(k=4, d=1, seed=0, n_classes=2)
    offsets = SpreadOffsets((0,), 4)
    models = train_ensemble(ds, config, MAJORITY, offsets)
    partitions = build_partitions(ds, config).partitions
    for i, model in enumerate(models):
        assert model == train(MAJORITY, canonical_sort(partitions[i]), 2)


def test_empty_dataset_trains_constant_zero_models():
    ds = Dataset((), n_classes=3, feature_dim=2)
    config = AggregationConfig(k=2, d=2, seed=1, n_classes=3)
    models = train_ensemble(ds, config, MAJORITY)
    assert len(models) == 4
    assert all(predict(m, [0, 0]) == 0 for m in models)


def test_collect_votes_shape_and_metadata():
    ds = _toy_dataset()
    config = AggregationConfig(k=3, d=1, seed=0, n_classes=2)
    offsets = SpreadOffsets((0,), 3)
    models = train_ensemble(ds, config, MAJORITY, offsets)
    matrix = collect_votes(models, [(1, 2), (3, 4)], config, offsets, labels=[0, 1])
    assert matrix.n_test == 2
    assert all(len(row) == 3 for row in matrix.votes)

    empty = collect_votes(models, [], config, offsets)
    assert empty.n_test == 0
    assert empty.config == config and empty.offsets == offsets


def test_collect_votes_requires_kd_models():
    config = AggregationConfig(k=3, d=1, seed=0, n_classes=2)
    with pytest.raises(DimensionMismatch):
        collect_votes([], [(1,)], config, SpreadOffsets((0,), 3))


def test_vote_matrix_validates_entries():
    config = AggregationConfig(k=2, d=1, seed=0, n_classes=2)
    offsets = SpreadOffsets((0,), 2)
    with pytest.raises(DataError):
        VoteMatrix(((0, 5),), config, offsets)
    with pytest.raises(DimensionMismatch):
        VoteMatrix(((0,),), config, offsets)
    with pytest.raises(DimensionMismatch):
        VoteMatrix(((0, 1),), config, offsets, labels=(0, 1))


def test_aggregate_prediction_majority_and_ties():
    assert aggregate_prediction([0, 0, 1], 2) == 0
    assert aggregate_prediction([0, 0, 1, 1], 2) == 0
    assert aggregate_prediction([2, 1, 1, 2], 3) == 1


@given(st.lists(st.integers(0, 3), min_size=1, max_size=15), st.randoms(use_true_random=False))
def test_aggregate_prediction_is_permutation_invariant(row, rnd):
    before = aggregate_prediction(row, 4)
    rnd.shuffle(row)
    assert aggregate_prediction(row, 4) == before


def _matrix(votes, labels, n_classes=2, d=1):
    kd = len(votes[0])
    k = kd // d
    config = AggregationConfig(k=k, d=d, seed=0, n_classes=n_classes)
    offsets = SpreadOffsets(tuple(range(d)), kd)
    return VoteMatrix(tuple(tuple(r) for r in votes), config, offsets,
                      tuple(labels) if labels is not None else None)


def test_ensemble_stats_perfect():
    m = _matrix([[1, 1], [0, 0]], [1, 0])
    stats = ensemble_stats(m)
    assert stats.clean_accuracy == 1
    assert stats.base_accuracy == 1


def test_ensemble_stats_tie_counts_for_the_smaller_index():
    m = _matrix([[0, 1]], [0])
    stats = ensemble_stats(m)
    assert stats.clean_accuracy == 1
    assert stats.base_accuracy == Fraction(1, 2)


def test_ensemble_stats_requires_labels_and_rows():
    with pytest.raises(MissingLabels):
        ensemble_stats(_matrix([[0, 1]], None))
    config = AggregationConfig(k=2, d=1, seed=0, n_classes=2)
    empty = VoteMatrix((), config, SpreadOffsets((0,), 2), labels=())
    with pytest.raises(EmptyTestSet):
        ensemble_stats(empty)


def test_parallel_training_matches_sequential():
    ds = _toy_dataset()
    config = AggregationConfig(k=3, d=2, seed=9, n_classes=2)
    offsets = SpreadOffsets((0, 2), 6)
    seq = train_ensemble(ds, config, MAJORITY, offsets, workers=1)
    par = train_ensemble(ds, config, MAJORITY, offsets, workers=4)
    assert seq == par
    tests = [(i, i) for i in range(6)]
    assert collect_votes(seq, tests, config, offsets, workers=1) == collect_votes(
        par, tests, config, offsets, workers=3
    )
