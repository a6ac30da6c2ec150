"""Deterministic split/spread ensembles with exact poisoning certificates."""

from .datamodel import (
    AggregationConfig,
    Dataset,
    LabeledSample,
    canonical_sort,
    validate_dataset,
)
from .ensemble import (
    EnsembleStats,
    VoteMatrix,
    aggregate_prediction,
    collect_votes,
    ensemble_stats,
    train_ensemble,
)
from .hashing import (
    PartitionAssignment,
    SpreadOffsets,
    SubsetLayout,
    build_partitions,
    build_subsets,
    generate_offsets,
    split_hash,
    spread,
    spread_inverse,
)
from .certifier import (
    CertificateReport,
    MarginTable,
    RadiusStats,
    SampleCertificate,
    build_report,
    certified_accuracy,
    certified_fraction_curve,
    certify_matrix,
    conditional_certified,
    dpa_baseline_radius,
    dpa_radius,
    fa_radius,
    margin_table,
    margin_tables,
    radius_stats,
)
from .infinite_aggregation import (
    IAVoteDistribution,
    ia_brute_force_check,
    ia_radius,
    ia_votes,
)
from .learners import LearnerSpec, predict, train
from .oracle import (
    VerificationReport,
    conditional_exact_check,
    exact_poison_radius,
    verify_certificates,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationConfig",
    "CertificateReport",
    "Dataset",
    "EnsembleStats",
    "IAVoteDistribution",
    "LabeledSample",
    "LearnerSpec",
    "MarginTable",
    "PartitionAssignment",
    "RadiusStats",
    "SampleCertificate",
    "SpreadOffsets",
    "SubsetLayout",
    "VerificationReport",
    "VoteMatrix",
    "aggregate_prediction",
    "build_partitions",
    "build_report",
    "build_subsets",
    "canonical_sort",
    "certified_accuracy",
    "certified_fraction_curve",
    "certify_matrix",
    "collect_votes",
    "conditional_certified",
    "conditional_exact_check",
    "dpa_baseline_radius",
    "dpa_radius",
    "ensemble_stats",
    "exact_poison_radius",
    "fa_radius",
    "generate_offsets",
    "ia_brute_force_check",
    "ia_radius",
    "ia_votes",
    "margin_table",
    "margin_tables",
    "predict",
    "radius_stats",
    "split_hash",
    "spread",
    "spread_inverse",
    "train",
    "train_ensemble",
    "validate_dataset",
    "verify_certificates",
]
