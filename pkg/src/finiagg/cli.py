"""Command-line interface and file formats.

Formats
-------
Dataset CSV: header ``label,f0,...,f{n-1}``, integer cells, UTF-8, LF line
endings. Test CSVs may drop the label column (header ``f0,...``).

Vote-matrix JSON::

    {"k": int, "d": int, "offsets": [int], "n_classes": int,
     "labels": [int]?, "votes": [[int; kd]]}

Offsets are embedded so certification never re-derives them from a seed.

All fractions in JSON reports appear both as exact ``"num/den"`` strings
and as advisory floats. Exit codes: 0 success, 1 usage, 2 data error,
3 limit exceeded, 4 soundness violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from ._parallel import env_workers
from .certifier import (
    build_report,
    certified_accuracy,
    certified_fraction_curve,
    certify_matrix,
    margin_tables,
    radius_stats,
)
from .datamodel import AggregationConfig, Dataset, validate_dataset
from .ensemble import VoteMatrix, collect_votes, ensemble_stats, train_ensemble
from .errors import (
    DataError,
    EmptyTestSet,
    FiniteAggError,
    MissingLabels,
    SoundnessViolation,
    UsageError,
)
from .hashing import SpreadOffsets, generate_offsets
from .infinite_aggregation import ia_radius, ia_votes
from .learners import (
    EXTERNAL_VOTES,
    MAJORITY_LABEL,
    NEAREST_CENTROID,
    LearnerSpec,
)
from .oracle import verify_certificates

_LEARNER_ALIASES = {
    "majority": MAJORITY_LABEL,
    MAJORITY_LABEL: MAJORITY_LABEL,
    "centroid": NEAREST_CENTROID,
    NEAREST_CENTROID: NEAREST_CENTROID,
    "external": EXTERNAL_VOTES,
    EXTERNAL_VOTES: EXTERNAL_VOTES,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are exit 1
        raise UsageError(message)


# ---------------------------------------------------------------------------
# file formats


def read_dataset_csv(
    path: str | Path, n_classes: int | None = None
) -> Dataset:
    rows, feature_dim, labeled = _read_csv(path)
    if not labeled:
        raise DataError(f"{path}: training data needs a label column")
    return validate_dataset(rows, n_classes, feature_dim)


def read_test_csv(
    path: str | Path,
) -> tuple[list[tuple[int, ...]], list[int] | None]:
    """Read test inputs; returns (feature rows, labels or None)."""
    rows, feature_dim, labeled = _read_csv(path)
    if labeled:
        features = [tuple(r[1:]) for r in rows]
        labels = [r[0] for r in rows]
    else:
        features = [tuple(r) for r in rows]
        labels = None
    for idx, f in enumerate(features):
        if len(f) != feature_dim:
            raise DataError(f"{path}: row {idx} has {len(f)} features, expected {feature_dim}")
        for col, v in enumerate(f):
            if v < 0:
                raise DataError(f"{path}: row {idx}: feature f{col} is negative")
    return features, labels


def _read_csv(path: str | Path) -> tuple[list[tuple[int, ...]], int, bool]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{path}: missing header") from None
    header = [h.strip() for h in header]
    labeled = header[0] == "label"
    feature_names = header[1:] if labeled else header
    expected = [f"f{i}" for i in range(len(feature_names))]
    if feature_names != expected:
        raise DataError(
            f"{path}: header must be 'label,f0,...' or 'f0,...', got {','.join(header)}"
        )
    rows = []
    for idx, cells in enumerate(reader):
        if not cells:
            continue
        try:
            rows.append(tuple(int(c) for c in cells))
        except ValueError:
            raise DataError(f"{path}: row {idx} has a non-integer cell") from None
    return rows, len(feature_names), labeled


def write_dataset_csv(path: str | Path, dataset: Dataset) -> None:
    lines = ["label," + ",".join(f"f{i}" for i in range(dataset.feature_dim))]
    for s in dataset.samples:
        lines.append(",".join(str(v) for v in (s.label, *s.features)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def votes_to_json(matrix: VoteMatrix) -> str:
    obj: dict = {
        "k": matrix.config.k,
        "d": matrix.config.d,
        "offsets": list(matrix.offsets.offsets),
        "n_classes": matrix.config.n_classes,
    }
    if matrix.labels is not None:
        obj["labels"] = list(matrix.labels)
    obj["votes"] = [list(row) for row in matrix.votes]
    return json.dumps(obj, indent=2) + "\n"


def votes_from_json(text: str) -> VoteMatrix:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid vote-matrix JSON: {exc}") from exc
    try:
        k, d = int(obj["k"]), int(obj["d"])
        offsets = SpreadOffsets(tuple(int(r) for r in obj["offsets"]), k * d)
        n_classes = int(obj["n_classes"])
        votes = tuple(tuple(int(v) for v in row) for row in obj["votes"])
        raw_labels = obj.get("labels")
        labels = tuple(int(v) for v in raw_labels) if raw_labels is not None else None
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"vote-matrix JSON missing or malformed field: {exc}") from exc
    config = AggregationConfig(k=k, d=d, seed=0, n_classes=n_classes)
    return VoteMatrix(votes, config, offsets, labels)


def load_votes(path: str | Path) -> VoteMatrix:
    try:
        return votes_from_json(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _frac(fr: Fraction) -> dict:
    return {"exact": f"{fr.numerator}/{fr.denominator}", "float": float(fr)}


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _write_json(path: str | None, obj) -> None:
    _write_text(path, json.dumps(obj, indent=2) + "\n")


def curve_csv(curve: Sequence[Fraction]) -> str:
    lines = ["attack_size,certified_fraction"]
    for m, frac in enumerate(curve):
        lines.append(f"{m},{float(frac)!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# pipeline helpers


def _matrix_from_args(args) -> VoteMatrix:
    if args.votes is not None:
        if args.dataset is not None or args.test is not None:
            raise UsageError("--votes excludes --dataset/--test")
        return load_votes(args.votes)
    if args.dataset is None or args.test is None:
        raise UsageError("need either --votes or both --dataset and --test")
    kind = _LEARNER_ALIASES.get(args.learner)
    if kind is None:
        raise UsageError(f"unknown learner {args.learner!r}")
    if kind == EXTERNAL_VOTES:
        raise UsageError("learner external-votes requires --votes")
    dataset = read_dataset_csv(args.dataset, args.n_classes)
    features, labels = read_test_csv(args.test)
    n_classes = dataset.n_classes
    if labels is not None:
        for idx, lab in enumerate(labels):
            if lab < 0 or lab >= n_classes:
                raise DataError(f"{args.test}: row {idx}: label {lab} outside [0, {n_classes})")
    config = AggregationConfig(k=args.k, d=args.d, seed=args.seed, n_classes=n_classes)
    offsets = generate_offsets(args.k, args.d, args.seed, args.dpa_compatible)
    workers = env_workers()
    models = train_ensemble(dataset, config, LearnerSpec(kind), offsets, workers)
    matrix = collect_votes(models, features, config, offsets, labels, workers)
    if args.save_votes:
        _write_text(args.save_votes, votes_to_json(matrix))
    return matrix


def _stats_block(matrix: VoteMatrix, want_stats: bool) -> dict | None:
    if matrix.labels is None:
        if want_stats:
            raise MissingLabels("--stats")
        return None
    if matrix.n_test == 0:
        if want_stats:
            raise EmptyTestSet()
        return None
    stats = ensemble_stats(matrix)
    return {
        "clean_accuracy": _frac(stats.clean_accuracy),
        "base_accuracy": _frac(stats.base_accuracy),
    }


def _delta_block(matrix: VoteMatrix) -> list[dict]:
    out = []
    for table in margin_tables(matrix):
        challengers = []
        for cp in range(table.n_classes):
            if cp == table.prediction:
                continue
            challengers.append(
                {
                    "challenger": cp,
                    "rhs": table.rhs(cp),
                    "elements": table.delta_elements(cp),
                }
            )
        out.append({"prediction": table.prediction, "delta": challengers})
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_certify(args) -> int:
    matrix = _matrix_from_args(args)
    workers = env_workers()
    max_attack = args.max_attack_size if args.max_attack_size is not None else matrix.config.kd
    if matrix.n_test == 0:
        raise EmptyTestSet()
    report = build_report(matrix, max_attack, workers)
    obj: dict = {
        "command": "certify",
        "k": matrix.config.k,
        "d": matrix.config.d,
        "kd": matrix.config.kd,
        "n_classes": matrix.config.n_classes,
        "offsets": list(matrix.offsets.offsets),
        "n_test": matrix.n_test,
    }
    stats = _stats_block(matrix, args.stats)
    if stats is not None:
        obj["ensemble_stats"] = stats
    obj["radius_stats"] = {
        "pr_radius_up": _frac(report.stats.pr_radius_up),
        "mean_delta_r": _frac(report.stats.mean_delta_r),
    }
    obj["certificates"] = [
        {
            "predicted": c.predicted,
            "correct": c.correct,
            "fa_radius": c.fa_radius,
            "dpa_radius": c.dpa_radius,
        }
        for c in report.certificates
    ]
    obj["curve"] = [
        {"attack_size": m, "certified_fraction": _frac(f)}
        for m, f in enumerate(report.curve)
    ]
    if args.verbose:
        obj["delta_multisets"] = _delta_block(matrix)
    _write_json(args.out, obj)
    if args.curve:
        _write_text(args.curve, curve_csv(report.curve))
    return 0


def cmd_curve(args) -> int:
    matrix = _matrix_from_args(args)
    if matrix.n_test == 0:
        raise EmptyTestSet()
    certs = certify_matrix(matrix, env_workers())
    max_attack = args.max_attack_size if args.max_attack_size is not None else matrix.config.kd
    curve = certified_fraction_curve([c.fa_radius for c in certs], max_attack)
    _write_text(args.out, curve_csv(curve))
    return 0


def cmd_compare(args) -> int:
    matrix = _matrix_from_args(args)
    certs = certify_matrix(matrix, env_workers())
    stats = radius_stats([c.fa_radius for c in certs], [c.dpa_radius for c in certs])
    _write_json(
        args.out,
        {
            "command": "compare",
            "n_test": matrix.n_test,
            "pr_radius_up": _frac(stats.pr_radius_up),
            "mean_delta_r": _frac(stats.mean_delta_r),
        },
    )
    return 0


def cmd_cert_acc(args) -> int:
    matrix = _matrix_from_args(args)
    if matrix.labels is None:
        raise MissingLabels("certified accuracy")
    workers = env_workers()
    tables = margin_tables(matrix, workers)
    accuracy, argmin_q = certified_accuracy(
        tables, matrix.labels, args.budget, args.enumeration_cap, workers
    )
    certs = certify_matrix(matrix, workers)
    fraction = certified_fraction_curve([c.fa_radius for c in certs], args.budget)[args.budget]
    _write_json(
        args.out,
        {
            "command": "cert-acc",
            "budget": args.budget,
            "certified_accuracy": _frac(accuracy),
            "certified_fraction": _frac(fraction),
            "argmin_q": list(argmin_q),
        },
    )
    return 0


def cmd_oracle_check(args) -> int:
    matrix = _matrix_from_args(args)
    report = verify_certificates(
        matrix.votes,
        matrix.offsets,
        matrix.config.n_classes,
        matrix.labels,
        args.oracle_limit,
        env_workers(),
    )
    obj = {
        "command": "oracle-check",
        "n_test": matrix.n_test,
        "ok": report.ok,
        "gap_histogram": {str(g): c for g, c in report.gap_histogram().items()},
        "rows": [
            {
                "index": r.index,
                "fa_radius": r.fa_radius,
                "dpa_radius": r.dpa_radius,
                "exact_radius": r.exact_radius,
                "gap": r.gap,
                "sound": r.sound,
                "dpa_equivalent": r.dpa_equivalent,
            }
            for r in report.rows
        ],
    }
    _write_json(args.out, obj)
    if not report.ok:
        raise SoundnessViolation(
            f"{len(report.violations)} row(s) failed verification"
        )
    return 0


def cmd_ia(args) -> int:
    kind = _LEARNER_ALIASES.get(args.learner)
    if kind is None or kind == EXTERNAL_VOTES:
        raise UsageError(f"ia needs a trainable learner, got {args.learner!r}")
    dataset = read_dataset_csv(args.dataset, args.n_classes)
    features, labels = read_test_csv(args.test)
    spec = LearnerSpec(kind)
    results = []
    for idx, x in enumerate(features):
        dist = ia_votes(dataset, x, args.k, spec, args.limit)
        label = labels[idx] if labels is not None else None
        results.append(
            {
                "prediction": dist.prediction,
                "correct": (dist.prediction == label) if label is not None else None,
                "radius": ia_radius(dist),
                "per_class": [_frac(f) for f in dist.per_class],
                "conditional": [[_frac(f) for f in row] for row in dist.conditional],
            }
        )
    _write_json(
        args.out,
        {
            "command": "ia",
            "k": args.k,
            "n_classes": dataset.n_classes,
            "n_train": len(dataset),
            "results": results,
        },
    )
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _add_matrix_args(p: _Parser) -> None:
    p.add_argument("--dataset", help="training CSV (label,f0,...)")
    p.add_argument("--test", help="test CSV (label,f0,... or f0,...)")
    p.add_argument("--votes", help="vote-matrix JSON produced elsewhere")
    p.add_argument("--k", type=int, default=10, help="inverse sensitivity")
    p.add_argument("--d", type=int, default=1, help="spread degree")
    p.add_argument("--seed", type=int, default=0, help="offset generator seed")
    p.add_argument("--learner", default="centroid", help="majority | centroid | external")
    p.add_argument("--n-classes", type=int, default=None, help="override inferred class count")
    p.add_argument("--dpa-compatible", action="store_true", help="force offsets {0} (d=1 only)")
    p.add_argument("--save-votes", default=None, help="also write the vote-matrix JSON here")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> _Parser:
    parser = _Parser(prog="finiagg", description=__doc__ and __doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="train or ingest votes, then certify")
    _add_matrix_args(p)
    p.add_argument("--curve", default=None, help="also write the certified-fraction curve CSV here")
    p.add_argument("--max-attack-size", type=int, default=None)
    p.add_argument("--stats", action="store_true", help="require accuracy statistics")
    p.add_argument("--verbose", action="store_true", help="include per-sample delta multisets")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("curve", help="certified-fraction curve CSV only")
    _add_matrix_args(p)
    p.add_argument("--max-attack-size", type=int, default=None)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("compare", help="radius statistics vs the disjoint baseline")
    _add_matrix_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("cert-acc", help="worst-case accuracy under a shared poison set")
    _add_matrix_args(p)
    p.add_argument("--budget", type=int, default=1)
    p.add_argument("--enumeration-cap", type=int, default=10**6)
    p.set_defaults(func=cmd_cert_acc)

    p = sub.add_parser("oracle-check", help="verify certificates against brute force")
    _add_matrix_args(p)
    p.add_argument("--oracle-limit", type=int, default=16)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("ia", help="exhaustive subsampled-ensemble evaluation")
    p.add_argument("--dataset", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--learner", default="centroid")
    p.add_argument("--n-classes", type=int, default=None)
    p.add_argument("--limit", type=int, default=16)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ia)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except FiniteAggError as exc:
        sys.stderr.write(
            json.dumps(
                {
                    "error": type(exc).__name__,
                    "message": str(exc),
                    "exit_code": exc.exit_code,
                }
            )
            + "\n"
        )
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
