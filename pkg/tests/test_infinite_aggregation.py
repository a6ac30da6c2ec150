import random
from fractions import Fraction

import pytest

from finiagg import (
    Dataset,
    LabeledSample,
    LearnerSpec,
    ia_brute_force_check,
    ia_radius,
    ia_votes,
)
from finiagg.errors import InstanceTooLarge

MAJORITY = LearnerSpec("majority-label")
CENTROID = LearnerSpec("nearest-centroid")


def _dataset(pairs, n_classes):
    return Dataset(
        tuple(LabeledSample(tuple(f), lab) for f, lab in pairs),
        n_classes,
        len(pairs[0][0]) if pairs else 1,
    )


def test_empty_dataset_concentrates_on_the_empty_subset_vote():
    empty = Dataset((), 2, 1)
    dist = ia_votes(empty, (5,), k=3, spec=MAJORITY)
    assert dist.per_class == (Fraction(1), Fraction(0))
    assert dist.prediction == 0
    assert dist.conditional == ()


def test_singleton_dataset_splits_by_selection_probability():
    ds = _dataset([(([7]), 1)], 2)
    dist = ia_votes(ds, (7,), k=2, spec=MAJORITY)
    # half the mass trains on {} (predicts 0), half on the one sample
    assert dist.per_class == (Fraction(1, 2), Fraction(1, 2))
    assert dist.prediction == 0  # tie toward the smaller index
    assert dist.conditional[0] == (Fraction(0), Fraction(1))


def test_singleton_tie_to_larger_index_challenger_gives_radius_zero():
    ds = _dataset([(([7]), 1)], 2)
    dist = ia_votes(ds, (7,), k=2, spec=MAJORITY)
    assert ia_radius(dist) == 0


def test_constant_classifier_certifies_floor_k_halves():
    ds = _dataset([(([1]), 0), (([2]), 0)], 2)
    for k in (2, 3, 5, 8):
        dist = ia_votes(ds, (9,), k=k, spec=MAJORITY)
        assert dist.per_class[0] == 1
        assert all(cond == (Fraction(1), Fraction(0)) for cond in dist.conditional)
        assert ia_radius(dist) == k // 2


def test_size_limit():
    ds = _dataset([(([i]), 0) for i in range(6)], 2)
    with pytest.raises(InstanceTooLarge):
        ia_votes(ds, (0,), k=2, spec=MAJORITY, limit=5)


def _random_dataset(rng, max_size=8, n_classes=3, allow_empty=False):
    n = rng.randint(0 if allow_empty else 1, max_size)
    pairs = [([rng.randrange(6), rng.randrange(6)], rng.randrange(n_classes)) for _ in range(n)]
    return _dataset(pairs, n_classes) if pairs else Dataset((), n_classes, 2)


def test_normalization_is_exact(rng):
    for _ in range(25):
        ds = _random_dataset(rng, max_size=7, allow_empty=True)
        k = rng.choice([2, 3, 4])
        spec = rng.choice([MAJORITY, CENTROID])
        dist = ia_votes(ds, (rng.randrange(6), rng.randrange(6)), k, spec)
        assert sum(dist.per_class) == 1
        for cond in dist.conditional:
            assert sum(cond) == 1


def test_decomposition_identity(rng):
    # overall score = (1/k) * conditional + (1 - 1/k) * score without the sample
    for _ in range(20):
        ds = _random_dataset(rng, max_size=6)
        k = rng.choice([2, 3])
        spec = rng.choice([MAJORITY, CENTROID])
        x = (rng.randrange(6), rng.randrange(6))
        dist = ia_votes(ds, x, k, spec)
        drop = rng.randrange(len(ds.samples))
        rest = Dataset(
            tuple(s for i, s in enumerate(ds.samples) if i != drop),
            ds.n_classes,
            ds.feature_dim,
        )
        rest_dist = ia_votes(rest, x, k, spec)
        for c in range(ds.n_classes):
            assert dist.per_class[c] == (
                Fraction(1, k) * dist.conditional[drop][c]
                + (1 - Fraction(1, k)) * rest_dist.per_class[c]
            )


def test_monte_carlo_estimate_agrees():
    rng = random.Random(11)
    ds = _dataset(
        [([1, 0], 0), ([2, 1], 1), ([0, 3], 2), ([4, 4], 1), ([1, 2], 0)], 3
    )
    k = 3
    x = (2, 2)
    dist = ia_votes(ds, x, k, spec=MAJORITY)
    draws = 100_000
    hits = [0] * 3
    from finiagg import canonical_sort, predict, train

    for _ in range(draws):
        chosen = [s for s in ds.samples if rng.random() < 1 / k]
        model = train(MAJORITY, canonical_sort(chosen), 3)
        hits[predict(model, x)] += 1
    for c in range(3):
        p = dist.per_class[c]
        se = (float(p * (1 - p)) / draws) ** 0.5
        assert abs(hits[c] / draws - float(p)) <= 4 * se + 1e-12


def _selection_radius(dist):
    # independent evaluator: the best m-element pick from the finite costs
    # plus unlimited bulk copies, found by trying every split explicitly
    c = dist.prediction
    k = dist.k
    radius = k
    for cp in range(len(dist.per_class)):
        if cp == c:
            continue
        gap = dist.per_class[c] - dist.per_class[cp]
        bulk = 1 + gap
        finite = sorted(
            (1 + cond[c] - cond[cp] for cond in dist.conditional), reverse=True
        )
        m = 0
        while m < k:
            best = max(
                sum(finite[:t]) + (m + 1 - t) * bulk
                for t in range(0, min(m + 1, len(finite)) + 1)
            )
            cost = Fraction(best, k)
            if cost > gap or (cp < c and cost == gap):
                break
            m += 1
        radius = min(radius, m)
    return radius


def test_radius_merge_matches_exhaustive_selection(rng):
    for _ in range(25):
        ds = _random_dataset(rng, max_size=6)
        k = rng.choice([2, 3, 4])
        spec = rng.choice([MAJORITY, CENTROID])
        dist = ia_votes(ds, (rng.randrange(6), rng.randrange(6)), k, spec)
        assert ia_radius(dist) == _selection_radius(dist)


def test_radius_soundness_against_brute_force(rng):
    pool = [LabeledSample((0, 0), 0), LabeledSample((5, 5), 2)]
    for _ in range(12):
        ds = _random_dataset(rng, max_size=5)
        k = rng.choice([2, 3])
        spec = rng.choice([MAJORITY, CENTROID])
        x = (rng.randrange(6), rng.randrange(6))
        dist = ia_votes(ds, x, k, spec)
        radius = ia_radius(dist)
        budget = min(radius, 2)
        assert ia_brute_force_check(ds, x, k, spec, budget, pool)


def test_brute_force_check_trivial_budget():
    ds = _dataset([(([3]), 1)], 2)
    assert ia_brute_force_check(ds, (3,), 2, MAJORITY, 0, [])


def test_brute_force_check_detects_fragile_predictions():
    # one class-1 sample: prediction is the tie toward 0; inserting a second
    # class-1 sample breaks the tie and flips it
    ds = _dataset([(([3]), 1)], 2)
    pool = [LabeledSample((3,), 1)]
    assert not ia_brute_force_check(ds, (3,), 2, MAJORITY, 1, pool)
