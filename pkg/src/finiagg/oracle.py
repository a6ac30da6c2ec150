"""Exhaustive poisoning adversary for small ensembles.

The adversary model matches the one the certificates bound: a budget of m
poisons touches at most m partitions H, and every classifier consuming a
touched partition may afterwards vote arbitrarily. For a fixed H and a
target challenger w, setting ALL affected votes to w simultaneously
maximizes w's count and minimizes every other count, so if any assignment
of affected votes dethrones the original winner via final class w, the
all-to-w assignment does too. Enumerating (w, H) pairs is therefore an
exact search, reducing the n_classes^|A(H)| assignment space to n_classes-1
candidates per subset.

Affected-classifier sets are tracked as bitmasks over the kd classifiers,
and the search ascends by |H|, short-circuiting at the first flip; a
flip found at size m also exists at every larger size (supersets only add
adversary freedom), so the first failing level fixes the exact radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from ._parallel import ordered_map
from .certifier import dpa_radius, fa_radius, margin_table
from .ensemble import aggregate_prediction
from .errors import InstanceTooLarge
from .hashing import SpreadOffsets, spread

DEFAULT_LIMIT = 16


def _partition_masks(offsets: SpreadOffsets) -> list[int]:
    masks = []
    for j in range(offsets.kd):
        mask = 0
        for i in spread(j, offsets):
            mask |= 1 << i
        masks.append(mask)
    return masks


def _class_masks(row: Sequence[int], n_classes: int) -> list[int]:
    masks = [0] * n_classes
    for i, v in enumerate(row):
        masks[v] |= 1 << i
    return masks


def _flips(
    subset: tuple[int, ...],
    part_masks: Sequence[int],
    class_masks: Sequence[int],
    counts: Sequence[int],
    prediction: int,
) -> bool:
    affected = 0
    for j in subset:
        affected |= part_masks[j]
    size = affected.bit_count()
    hit = [(affected & class_masks[c]).bit_count() for c in range(len(counts))]
    winner_left = counts[prediction] - hit[prediction]
    for w in range(len(counts)):
        if w == prediction:
            continue
        gained = counts[w] - hit[w] + size
        if gained > winner_left or (gained == winner_left and w < prediction):
            return True
    return False


def exact_poison_radius(
    row: Sequence[int],
    offsets: SpreadOffsets,
    n_classes: int,
    label: int | None = None,
    limit: int = DEFAULT_LIMIT,
) -> int:
    """Largest budget no exhaustive attack can beat; -1 on a wrong prediction."""
    kd = offsets.kd
    if kd > limit:
        raise InstanceTooLarge(f"kd={kd} exceeds the oracle limit {limit}")
    prediction = aggregate_prediction(row, n_classes)
    if label is not None and prediction != label:
        return -1
    part_masks = _partition_masks(offsets)
    class_masks = _class_masks(row, n_classes)
    counts = [m.bit_count() for m in class_masks]
    for m in range(1, kd + 1):
        for subset in combinations(range(kd), m):
            if _flips(subset, part_masks, class_masks, counts, prediction):
                return m - 1
    return kd


def conditional_exact_check(
    row: Sequence[int],
    offsets: SpreadOffsets,
    affected: Iterable[int],
    budget: int,
    n_classes: int,
    label: int | None = None,
    limit: int = DEFAULT_LIMIT,
) -> bool:
    """True iff no attack confined to the given partitions flips the prediction."""
    kd = offsets.kd
    if kd > limit:
        raise InstanceTooLarge(f"kd={kd} exceeds the oracle limit {limit}")
    prediction = aggregate_prediction(row, n_classes)
    if label is not None and prediction != label:
        return False
    q = tuple(affected)
    take = max(0, min(budget, len(q)))
    if take == 0:
        return True
    part_masks = _partition_masks(offsets)
    class_masks = _class_masks(row, n_classes)
    counts = [m.bit_count() for m in class_masks]
    # Flips are monotone in the touched set, so only maximal subsets matter.
    for subset in combinations(q, take):
        if _flips(subset, part_masks, class_masks, counts, prediction):
            return False
    return True


@dataclass(frozen=True)
class RowVerification:
    index: int
    fa_radius: int
    dpa_radius: int | None
    exact_radius: int
    gap: int
    sound: bool
    dpa_equivalent: bool | None


@dataclass(frozen=True)
class VerificationReport:
    rows: tuple[RowVerification, ...]

    @property
    def ok(self) -> bool:
        return all(r.sound and r.dpa_equivalent is not False for r in self.rows)

    @property
    def violations(self) -> tuple[RowVerification, ...]:
        return tuple(r for r in self.rows if not r.sound or r.dpa_equivalent is False)

    def gap_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for r in self.rows:
            hist[r.gap] = hist.get(r.gap, 0) + 1
        return dict(sorted(hist.items()))


def verify_certificates(
    rows: Sequence[Sequence[int]],
    offsets: SpreadOffsets,
    n_classes: int,
    labels: Sequence[int] | None = None,
    limit: int = DEFAULT_LIMIT,
    workers: int = 1,
) -> VerificationReport:
    """Check every certificate against the exhaustive adversary.

    Soundness requires the certified radius never to exceed the exact one;
    with d=1 the fine-grained certificate must also equal the plain
    disjoint-partition radius on the same votes. The per-row gap records
    certificate slack (0 means tight).
    """

    def one(indexed: tuple[int, Sequence[int]]) -> RowVerification:
        t, row = indexed
        label = labels[t] if labels is not None else None
        table = margin_table(row, offsets, n_classes)
        fa = fa_radius(table, label)
        exact = exact_poison_radius(row, offsets, n_classes, label, limit)
        dpa = dpa_radius(row, n_classes, label) if offsets.d == 1 else None
        return RowVerification(
            index=t,
            fa_radius=fa,
            dpa_radius=dpa,
            exact_radius=exact,
            gap=exact - fa,
            sound=fa <= exact,
            dpa_equivalent=(dpa == fa) if dpa is not None else None,
        )

    return VerificationReport(tuple(ordered_map(one, list(enumerate(rows)), workers)))
