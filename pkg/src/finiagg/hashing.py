"""Split and spread hashing: partitions, offsets, and training subsets.

The split hash sends a sample to one of ``kd`` partitions by the remainder
of its feature sum. The spread hash sends partition ``j`` to the ``d``
classifiers ``{(j + r) mod kd : r in R}`` for a fixed offset set ``R``; its
inverse tells each classifier which partitions it trains on. Any distinct-
element ``R`` makes the hash balanced, so every partition feeds exactly
``d`` classifiers and every classifier consumes exactly ``d`` partitions.

Offset generation is pinned to a named, platform-independent generator so
that identical ``(k, d, seed)`` inputs yield bit-identical layouts anywhere:

* state setup: one splitmix64 step over the seed
  (``s += 0x9E3779B97F4A7C15``; ``z = s``; ``z = (z ^ z>>30) * 0xBF58476D1CE4E5B9``;
  ``z = (z ^ z>>27) * 0x94D049BB133111EB``; ``z ^= z>>31``), zero mapped to the
  splitmix increment so the xorshift state is never zero;
* draws: xorshift64* (``x ^= x<<12``; ``x ^= x>>25``; ``x ^= x<<27``;
  output ``x * 0x2545F4914F6CDD1D``), all arithmetic mod 2^64;
* selection: a partial Fisher-Yates over ``[0, kd)`` taking ``d`` values,
  indexing each draw by ``value % remaining``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .datamodel import AggregationConfig, Dataset, LabeledSample, canonical_sort
from .errors import DataError, DTooLarge, UsageError

_MASK64 = (1 << 64) - 1
_SPLITMIX_INC = 0x9E3779B97F4A7C15


class _XorShift64Star:
    """Deterministic 64-bit generator; see the module docstring for constants."""

    def __init__(self, seed: int):
        s = (seed + _SPLITMIX_INC) & _MASK64
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z ^= z >> 31
        self._state = z or _SPLITMIX_INC

    def next_u64(self) -> int:
        x = self._state
        x ^= (x << 12) & _MASK64
        x ^= x >> 25
        x ^= (x << 27) & _MASK64
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def below(self, n: int) -> int:
        return self.next_u64() % n


@dataclass(frozen=True)
class SpreadOffsets:
    """The offset set R: ``d`` distinct integers in ``[0, kd)``, sorted."""

    offsets: tuple[int, ...]
    kd: int

    def __post_init__(self):
        if len(set(self.offsets)) != len(self.offsets):
            raise DataError(f"offsets must be distinct, got {self.offsets}")
        if any(r < 0 or r >= self.kd for r in self.offsets):
            raise DataError(f"offsets must lie in [0, {self.kd}), got {self.offsets}")
        object.__setattr__(self, "offsets", tuple(sorted(self.offsets)))

    @property
    def d(self) -> int:
        return len(self.offsets)


def split_hash(sample: LabeledSample, kd: int) -> int:
    """Partition index of a sample: sum of its feature values mod ``kd``.

    The label is deliberately excluded from the sum.
    """
    return sum(sample.features) % kd


def generate_offsets(
    k: int, d: int, seed: int, dpa_compatible: bool = False
) -> SpreadOffsets:
    """Draw the offset set R for ``(k, d, seed)`` with the pinned generator.

    With ``dpa_compatible`` (valid only for ``d == 1``) the result is ``{0}``
    regardless of seed, making the d=1 layout coincide with plain disjoint
    partitioning exactly instead of up to a classifier relabeling.
    """
    kd = k * d
    if d < 1:
        raise UsageError(f"spread degree must be positive, got d={d}")
    if d > kd:
        raise DTooLarge(d, kd)
    if dpa_compatible:
        if d != 1:
            raise UsageError(f"dpa-compatible mode requires d=1, got d={d}")
        return SpreadOffsets((0,), kd)
    rng = _XorShift64Star(seed)
    pool = list(range(kd))
    for t in range(d):
        swap = t + rng.below(kd - t)
        pool[t], pool[swap] = pool[swap], pool[t]
    return SpreadOffsets(tuple(pool[:d]), kd)


def spread(j: int, offsets: SpreadOffsets) -> frozenset[int]:
    """Classifier indices that consume partition ``j``."""
    kd = offsets.kd
    return frozenset((j + r) % kd for r in offsets.offsets)


def spread_inverse(i: int, offsets: SpreadOffsets) -> frozenset[int]:
    """Partition indices consumed by classifier ``i``."""
    kd = offsets.kd
    return frozenset((i - r) % kd for r in offsets.offsets)


@dataclass(frozen=True)
class PartitionAssignment:
    """The split stage: each sample placed in exactly one of ``kd`` partitions."""

    kd: int
    partition_of: tuple[int, ...]
    partitions: tuple[tuple[LabeledSample, ...], ...]


@dataclass(frozen=True)
class SubsetLayout:
    """The spread stage: per-classifier training sequences, canonically sorted."""

    kd: int
    subsets: tuple[tuple[LabeledSample, ...], ...]


def build_partitions(dataset: Dataset, config: AggregationConfig) -> PartitionAssignment:
    """Split the dataset into ``kd`` partitions by the split hash."""
    kd = config.kd
    partition_of = tuple(split_hash(s, kd) for s in dataset.samples)
    buckets: list[list[LabeledSample]] = [[] for _ in range(kd)]
    for s, j in zip(dataset.samples, partition_of):
        buckets[j].append(s)
    return PartitionAssignment(kd, partition_of, tuple(tuple(b) for b in buckets))


def build_subsets(assignment: PartitionAssignment, offsets: SpreadOffsets) -> SubsetLayout:
    """Assemble training subset ``S_i`` from the partitions classifier ``i`` consumes."""
    if assignment.kd != offsets.kd:
        raise DataError(
            f"assignment kd={assignment.kd} and offsets kd={offsets.kd} disagree"
        )
    kd = assignment.kd
    subsets = []
    for i in range(kd):
        pooled: list[LabeledSample] = []
        for j in spread_inverse(i, offsets):
            pooled.extend(assignment.partitions[j])
        subsets.append(canonical_sort(pooled))
    return SubsetLayout(kd, tuple(subsets))
