"""Exact integer certificates against training-set poisoning.

Everything here works on one test sample's margin table: the global vote
counts ``N_c`` over the ``kd`` classifiers and the per-partition counts
``a[c][j]`` over the ``d`` classifiers that consume partition ``j``.

One poison lands in a single partition ``j`` and can, at worst, turn all
``d`` classifiers consuming ``j`` toward a challenger ``c'``: the winner
loses ``a[c][j]`` votes and the challenger gains ``d - a[c'][j]``, so the
vote margin shrinks by at most ``e_j = d + a[c][j] - a[c'][j]``. A budget
of ``m`` poisons therefore shrinks it by at most the sum of the ``m``
largest ``e_j``, and the prediction survives as long as that sum stays
within ``rhs = N_c - N_{c'} - 1[c' < c]`` (the subtraction accounts for
losing ties to smaller class indices). All comparisons are single integer
inequalities: this is the fractional certificate multiplied through by
``kd``, so no certificate can be flipped by a float boundary.

The plain disjoint-partition baseline is the same computation with every
``e_j`` replaced by its ceiling ``2d``; with ``d = 1`` the two coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from ._parallel import ordered_map
from .ensemble import VoteMatrix, aggregate_prediction
from .errors import EnumerationTooLarge, LengthMismatch, MissingLabels, EmptyTestSet, DataError
from .hashing import SpreadOffsets, spread


@dataclass(frozen=True)
class MarginTable:
    """Vote statistics of one test sample, global and per partition."""

    prediction: int
    kd: int
    d: int
    n_classes: int
    global_counts: tuple[int, ...]
    partition_counts: tuple[tuple[int, ...], ...]  # [class][partition]

    def __post_init__(self):
        if sum(self.global_counts) != self.kd:
            raise DataError("global vote counts do not sum to kd")
        for j in range(self.kd):
            if sum(self.partition_counts[c][j] for c in range(self.n_classes)) != self.d:
                raise DataError(f"partition {j}: per-class counts do not sum to d")
        for c in range(self.n_classes):
            if sum(self.partition_counts[c]) != self.d * self.global_counts[c]:
                raise DataError(f"class {c}: partition counts do not sum to d * N_c")

    def rhs(self, challenger: int) -> int:
        """Integer margin against ``challenger``, tie-break included."""
        c = self.prediction
        return (
            self.global_counts[c]
            - self.global_counts[challenger]
            - (1 if challenger < c else 0)
        )

    def delta_elements(self, challenger: int, scope: Iterable[int] | None = None) -> list[int]:
        """Worst-case margin losses ``e_j``, sorted descending.

        ``scope`` restricts the partitions an adversary may touch; the
        default is all of them.
        """
        c = self.prediction
        a_c = self.partition_counts[c]
        a_q = self.partition_counts[challenger]
        js = range(self.kd) if scope is None else scope
        return sorted((self.d + a_c[j] - a_q[j] for j in js), reverse=True)


def margin_table(row: Sequence[int], offsets: SpreadOffsets, n_classes: int) -> MarginTable:
    """Tabulate one vote row into global and per-partition counts."""
    kd = offsets.kd
    d = offsets.d
    counts = [0] * n_classes
    for v in row:
        counts[v] += 1
    per_part = [[0] * kd for _ in range(n_classes)]
    for j in range(kd):
        for i in spread(j, offsets):
            per_part[row[i]][j] += 1
    return MarginTable(
        aggregate_prediction(row, n_classes),
        kd,
        d,
        n_classes,
        tuple(counts),
        tuple(tuple(r) for r in per_part),
    )


def _scan_radius(elements_desc: Sequence[int], rhs: int) -> int:
    """Largest m whose top-m element sum stays within rhs.

    Elements are non-negative, so prefix sums are nondecreasing and a linear
    scan suffices.
    """
    total = 0
    m = 0
    for e in elements_desc:
        total += e
        if total > rhs:
            break
        m += 1
    return m


def dpa_radius(row: Sequence[int], n_classes: int, label: int | None = None) -> int:
    """Certified radius of a plain disjoint-partition ensemble of k classifiers.

    Each poison changes at most one vote, shifting the margin to any
    challenger by at most 2, hence ``floor(rhs / 2)`` per challenger.
    Returns -1 when a label is supplied and the prediction misses it.
    """
    counts = [0] * n_classes
    for v in row:
        counts[v] += 1
    c = aggregate_prediction(row, n_classes)
    if label is not None and c != label:
        return -1
    radius = len(row)
    for cp in range(n_classes):
        if cp == c:
            continue
        rhs = counts[c] - counts[cp] - (1 if cp < c else 0)
        radius = min(radius, max(0, rhs // 2))
    return radius


def fa_radius(table: MarginTable, label: int | None = None) -> int:
    """Certified radius from the per-partition margin statistics.

    For each challenger, the radius is the largest budget whose worst-case
    margin loss (top-m sum of the delta multiset) stays within the integer
    margin; the sample's radius is the minimum over challengers, capped at
    ``kd``. Returns -1 when a label is supplied and the prediction misses it.
    """
    c = table.prediction
    if label is not None and c != label:
        return -1
    radius = table.kd
    for cp in range(table.n_classes):
        if cp == c:
            continue
        radius = min(radius, _scan_radius(table.delta_elements(cp), table.rhs(cp)))
    return radius


def dpa_baseline_radius(table: MarginTable, label: int | None = None) -> int:
    """Baseline radius over the same kd classifiers with every e_j at its cap 2d."""
    c = table.prediction
    if label is not None and c != label:
        return -1
    radius = table.kd
    for cp in range(table.n_classes):
        if cp == c:
            continue
        radius = min(radius, max(0, table.rhs(cp) // (2 * table.d)))
    return radius


def conditional_certified(
    table: MarginTable,
    affected: Iterable[int],
    budget: int,
    label: int | None = None,
) -> bool:
    """Certify against adversaries confined to the given partition set.

    True iff the prediction is correct (when a label is given) and, for every
    challenger, the sum of the ``min(budget, |Q|)`` largest delta elements
    restricted to the partitions in ``Q`` stays within the margin.
    """
    c = table.prediction
    if label is not None and c != label:
        return False
    q = tuple(affected)
    take = max(0, min(budget, len(q)))
    for cp in range(table.n_classes):
        if cp == c:
            continue
        elements = table.delta_elements(cp, q)
        if sum(elements[:take]) > table.rhs(cp):
            return False
    return True


@dataclass(frozen=True)
class SampleCertificate:
    predicted: int
    correct: bool | None
    dpa_radius: int
    fa_radius: int


@dataclass(frozen=True)
class RadiusStats:
    pr_radius_up: Fraction
    mean_delta_r: Fraction


@dataclass(frozen=True)
class CertificateReport:
    certificates: tuple[SampleCertificate, ...]
    curve: tuple[Fraction, ...]
    stats: RadiusStats


def margin_tables(matrix: VoteMatrix, workers: int = 1) -> list[MarginTable]:
    n_classes = matrix.config.n_classes
    return ordered_map(
        lambda row: margin_table(row, matrix.offsets, n_classes), matrix.votes, workers
    )


def certify_matrix(matrix: VoteMatrix, workers: int = 1) -> list[SampleCertificate]:
    """Per-sample certificates for every row of a vote matrix."""
    labels = matrix.labels

    def one(indexed: tuple[int, tuple[int, ...]]) -> SampleCertificate:
        t, row = indexed
        table = margin_table(row, matrix.offsets, matrix.config.n_classes)
        label = labels[t] if labels is not None else None
        return SampleCertificate(
            predicted=table.prediction,
            correct=(table.prediction == label) if label is not None else None,
            dpa_radius=dpa_baseline_radius(table, label),
            fa_radius=fa_radius(table, label),
        )

    return ordered_map(one, list(enumerate(matrix.votes)), workers)


def certified_fraction_curve(radii: Sequence[int], max_attack_size: int) -> tuple[Fraction, ...]:
    """``curve[m]`` = fraction of samples whose radius is at least m."""
    n = len(radii)
    if n == 0:
        raise EmptyTestSet()
    return tuple(
        Fraction(sum(1 for r in radii if r >= m), n) for m in range(max_attack_size + 1)
    )


def radius_stats(fa_radii: Sequence[int], dpa_radii: Sequence[int]) -> RadiusStats:
    """How often and by how much the fine-grained certificate beats the baseline.

    The denominator of ``pr_radius_up`` is the whole test set; the mean
    increase is taken over the improved samples only (0 if there are none).
    """
    if len(fa_radii) != len(dpa_radii):
        raise LengthMismatch(f"{len(fa_radii)} fine radii vs {len(dpa_radii)} baseline radii")
    n = len(fa_radii)
    if n == 0:
        return RadiusStats(Fraction(0), Fraction(0))
    gains = [f - d for f, d in zip(fa_radii, dpa_radii) if f > d]
    mean_gain = Fraction(sum(gains), len(gains)) if gains else Fraction(0)
    return RadiusStats(Fraction(len(gains), n), mean_gain)


def build_report(matrix: VoteMatrix, max_attack_size: int, workers: int = 1) -> CertificateReport:
    certs = certify_matrix(matrix, workers)
    curve = certified_fraction_curve([c.fa_radius for c in certs], max_attack_size)
    stats = radius_stats([c.fa_radius for c in certs], [c.dpa_radius for c in certs])
    return CertificateReport(tuple(certs), curve, stats)


def certified_accuracy(
    tables: Sequence[MarginTable],
    labels: Sequence[int],
    budget: int,
    enumeration_cap: int = 10**6,
    workers: int = 1,
) -> tuple[Fraction, tuple[int, ...]]:
    """Worst-case test accuracy over all attacks sharing one poison set.

    Minimizes the mean conditional certificate over every partition subset Q
    of size ``min(budget, kd)``; larger scopes only weaken the certificate,
    so smaller Q never attain the minimum. Returns the minimum and the first
    Q (in lexicographic order) attaining it.
    """
    if labels is None or len(labels) != len(tables):
        raise MissingLabels("certified accuracy")
    if budget < 0:
        raise DataError(f"attack budget must be non-negative, got {budget}")
    n = len(tables)
    if n == 0:
        raise EmptyTestSet()
    kd = tables[0].kd
    q_size = min(budget, kd)
    count = math.comb(kd, q_size)
    if count > enumeration_cap:
        raise EnumerationTooLarge(kd, budget, count, enumeration_cap)

    def score(q: tuple[int, ...]) -> int:
        return sum(
            1
            for table, label in zip(tables, labels)
            if conditional_certified(table, q, budget, label)
        )

    qs = list(combinations(range(kd), q_size))
    hits = ordered_map(score, qs, workers)
    best_hits, best_q = min(zip(hits, qs), key=lambda pair: (pair[0], pair[1]))
    return Fraction(best_hits, n), best_q
