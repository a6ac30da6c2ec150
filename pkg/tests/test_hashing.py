import random

import pytest

from finiagg import (
    AggregationConfig,
    LabeledSample,
    build_partitions,
    build_subsets,
    canonical_sort,
    generate_offsets,
    split_hash,
    spread,
    spread_inverse,
    validate_dataset,
)
from finiagg.datamodel import Dataset
from finiagg.errors import DTooLarge, UsageError
from finiagg.hashing import SpreadOffsets


def test_split_hash_is_feature_sum_mod_kd():
    assert split_hash(LabeledSample((100, 37), 1), 12) == 5
    assert split_hash(LabeledSample((0, 0, 0), 2), 9) == 0
    assert split_hash(LabeledSample((7,), 0), 1) == 0


def test_split_hash_ignores_the_label():
    for label in range(4):
        assert split_hash(LabeledSample((4, 9), label), 6) == 1


def test_generate_offsets_dpa_compatible_mode():
    assert generate_offsets(6, 1, seed=42, dpa_compatible=True).offsets == (0,)
    with pytest.raises(UsageError):
        generate_offsets(3, 2, seed=0, dpa_compatible=True)


def test_generate_offsets_is_deterministic_and_in_range():
    for seed in (0, 1, 2**63 - 1):
        first = generate_offsets(2, 2, seed)
        again = generate_offsets(2, 2, seed)
        assert first == again
        assert len(first.offsets) == 2
        assert all(0 <= r < 4 for r in first.offsets)


def test_generate_offsets_varies_with_seed():
    draws = {generate_offsets(5, 3, seed).offsets for seed in range(40)}
    assert len(draws) > 1


def test_generate_offsets_rejects_zero_partitions():
    with pytest.raises(DTooLarge):
        generate_offsets(0, 2, seed=0)


def test_spread_examples():
    r01 = SpreadOffsets((0, 1), 12)
    assert spread(11, r01) == {11, 0}
    r048 = SpreadOffsets((0, 4, 8), 12)
    assert spread(3, r048) == {3, 7, 11}
    identity = SpreadOffsets((0,), 5)
    for j in range(5):
        assert spread(j, identity) == {j}


def test_spread_inverse_examples():
    r01 = SpreadOffsets((0, 1), 12)
    assert spread_inverse(0, r01) == {0, 11}
    r048 = SpreadOffsets((0, 4, 8), 12)
    assert spread_inverse(5, r048) == {5, 1, 9}


def test_spread_duality_and_balance(rng):
    for _ in range(200):
        d = rng.randint(1, 4)
        k = rng.randint(1, 4)
        kd = k * d
        offsets = SpreadOffsets(tuple(rng.sample(range(kd), d)), kd)
        for i in range(kd):
            assert len(spread(i, offsets)) == d
            assert len(spread_inverse(i, offsets)) == d
            for j in range(kd):
                assert (j in spread_inverse(i, offsets)) == (i in spread(j, offsets))


def _dataset(rows):
    return validate_dataset(rows)


def test_build_partitions_groups_by_hash():
    ds = _dataset([(0, 5), (1, 17)])
    config = AggregationConfig(k=6, d=2, seed=0, n_classes=2)
    assignment = build_partitions(ds, config)
    assert assignment.partition_of == (5, 5)
    assert len(assignment.partitions[5]) == 2
    assert sum(len(p) for p in assignment.partitions) == len(ds)


def test_build_partitions_empty_dataset():
    ds = Dataset((), n_classes=2, feature_dim=1)
    config = AggregationConfig(k=3, d=2, seed=0, n_classes=2)
    assignment = build_partitions(ds, config)
    assert len(assignment.partitions) == 6
    assert all(p == () for p in assignment.partitions)


def test_build_subsets_hand_enumerated():
    # kd=4, R={0,1}: classifier i consumes partitions {i, i-1 mod 4}
    a = LabeledSample((0,), 0)   # hash 0
    b = LabeledSample((1,), 0)   # hash 1
    c = LabeledSample((3,), 1)   # hash 3
    ds = Dataset((a, b, c), n_classes=2, feature_dim=1)
    config = AggregationConfig(k=2, d=2, seed=0, n_classes=2)
    layout = build_subsets(build_partitions(ds, config), SpreadOffsets((0, 1), 4))
    assert layout.subsets[0] == canonical_sort([a, c])
    assert layout.subsets[1] == canonical_sort([a, b])
    assert layout.subsets[2] == (b,)
    assert layout.subsets[3] == (c,)


def test_build_subsets_d1_reduces_to_plain_partitions():
    ds = _dataset([(0, 0), (0, 1), (1, 2), (1, 3), (0, 4)])
    config = AggregationConfig(k=3, d=1, seed=0, n_classes=2)
    assignment = build_partitions(ds, config)
    layout = build_subsets(assignment, SpreadOffsets((0,), 3))
    for i in range(3):
        assert layout.subsets[i] == canonical_sort(assignment.partitions[i])


def test_build_subsets_conservation_and_multiplicity(rng):
    for _ in range(50):
        k, d = rng.randint(1, 4), rng.randint(1, 3)
        kd = k * d
        rows = [(rng.randrange(3), rng.randrange(30)) for _ in range(rng.randrange(12))]
        ds = validate_dataset(rows, n_classes=3) if rows else Dataset((), 3, 1)
        config = AggregationConfig(k=k, d=d, seed=7, n_classes=3)
        offsets = SpreadOffsets(tuple(rng.sample(range(kd), d)), kd)
        layout = build_subsets(build_partitions(ds, config), offsets)
        assert sum(len(s) for s in layout.subsets) == d * len(ds)
        for sample in ds.samples:
            appearances = sum(s.count(sample) for s in layout.subsets)
            total = ds.samples.count(sample)
            assert appearances == d * total


def test_layout_is_order_independent():
    rows = [(i % 3, i, i * i % 7) for i in range(20)]
    shuffled = list(rows)
    random.Random(5).shuffle(shuffled)
    config = AggregationConfig(k=4, d=2, seed=3, n_classes=3)
    offsets = generate_offsets(4, 2, 3)
    one = build_subsets(build_partitions(validate_dataset(rows), config), offsets)
    two = build_subsets(build_partitions(validate_dataset(shuffled), config), offsets)
    assert one == two
