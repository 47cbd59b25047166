"""Data model and CSV ingestion for benchmark-suite feature and performance tables.

A dataset couples one feature table (problem instances described by a shared
set of numeric landscape features, grouped into suites) with an optional
performance table (per instance and algorithm, the median target precision
reached within budget). Ingestion is strict and order-preserving: rows keep
file order, feature columns keep header order, and any structural problem is
an error rather than a silent repair.

Feature CSV schema:
    instance_id,suite_id,dimensionality,<feature_1>,...,<feature_n>
    empty cell or ``NA`` marks a missing feature value.

Performance CSV schema:
    instance_id,suite_id,algorithm_id,median_target_precision
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    DomainError,
    InsufficientDataError,
    IntegrityError,
    ParseError,
    SchemaError,
    SuiteLookupError,
)

FEATURE_ID_COLUMNS = ("instance_id", "suite_id", "dimensionality")
PERFORMANCE_COLUMNS = ("instance_id", "suite_id", "algorithm_id", "median_target_precision")


@dataclass(frozen=True)
class IngestConfig:
    """Options for feature-table ingestion."""

    missing_markers: frozenset[str] = frozenset({"", "NA"})


@dataclass(frozen=True, eq=False)
class InstanceRecord:
    """One problem instance: identity plus its feature vector.

    ``features`` may contain NaN placeholders for missing values until
    :func:`validate_and_drop_incomplete` has run.
    """

    instance_id: str
    suite_id: str
    dimensionality: int
    features: np.ndarray

    @property
    def key(self) -> tuple[str, str]:
        return (self.instance_id, self.suite_id)

    def is_complete(self) -> bool:
        return bool(np.all(np.isfinite(self.features)))


@dataclass(frozen=True, eq=False)
class SuiteMatrix:
    """All instances of one suite in a fixed row order over shared columns."""

    suite_id: str
    feature_names: tuple[str, ...]
    rows: tuple[InstanceRecord, ...]

    @property
    def k(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.feature_names)

    @property
    def instance_ids(self) -> tuple[str, ...]:
        return tuple(r.instance_id for r in self.rows)

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.vstack([r.features for r in self.rows]) if self.rows else np.empty((0, self.n))
        m.setflags(write=False)
        return m


@dataclass(frozen=True, eq=False)
class PerformanceRecord:
    """Median target precision of one algorithm on one instance.

    ``log_target`` is filled by preprocessing (see
    :func:`suitegauge.preprocessing.log_transform_targets`).
    """

    instance_id: str
    suite_id: str
    algorithm_id: str
    median_target_precision: float
    log_target: float | None = None

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.instance_id, self.suite_id, self.algorithm_id)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature suites plus performance records with referential integrity."""

    suites: dict[str, SuiteMatrix]
    performance: tuple[PerformanceRecord, ...] = ()
    algorithms: frozenset[str] = frozenset()

    @property
    def suite_ids(self) -> tuple[str, ...]:
        return tuple(self.suites)

    @property
    def feature_names(self) -> tuple[str, ...]:
        first = next(iter(self.suites.values()))
        return first.feature_names

    def suite(self, suite_id: str) -> SuiteMatrix:
        try:
            return self.suites[suite_id]
        except KeyError:
            raise SuiteLookupError(f"unknown suite {suite_id!r}") from None

    def iter_instances(self):
        for sm in self.suites.values():
            yield from sm.rows


@dataclass(frozen=True)
class DropEntry:
    instance_id: str
    suite_id: str
    reason: str


@dataclass(frozen=True)
class DropReport:
    """Instances removed by validation and why."""

    entries: tuple[DropEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)


def _read_rows(path: str | Path) -> list[tuple[int, list[str]]]:
    """Read a CSV file into (line_number, cells) pairs, skipping blank lines."""
    out = []
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            for lineno, cells in enumerate(csv.reader(fh), start=1):
                if not cells:
                    continue
                out.append((lineno, [c.strip() for c in cells]))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except csv.Error as exc:
        raise ParseError(f"malformed CSV in {path}: {exc}") from exc
    if not out:
        raise ParseError(f"{path} is empty")
    return out


def load_features(path: str | Path, config: IngestConfig | None = None) -> Dataset:
    """Load a feature CSV into suites grouped by suite_id, keeping file order.

    Missing or non-finite feature cells are kept as NaN and flagged for
    removal by :func:`validate_and_drop_incomplete`.
    """
    config = config or IngestConfig()
    rows = _read_rows(path)
    header_line, header = rows[0]
    if tuple(header[: len(FEATURE_ID_COLUMNS)]) != FEATURE_ID_COLUMNS:
        raise SchemaError(
            f"feature header must start with {','.join(FEATURE_ID_COLUMNS)}, got {header[:3]}"
        )
    feature_names = tuple(header[len(FEATURE_ID_COLUMNS):])
    if not feature_names:
        raise SchemaError("feature file declares no feature columns")
    if len(set(feature_names)) != len(feature_names):
        raise SchemaError("duplicate feature column names in header")

    seen: set[tuple[str, str]] = set()
    grouped: dict[str, list[InstanceRecord]] = {}
    for lineno, cells in rows[1:]:
        if len(cells) != len(header):
            raise SchemaError(
                f"line {lineno}: expected {len(header)} columns, got {len(cells)}"
            )
        instance_id, suite_id, dim_text = cells[0], cells[1], cells[2]
        try:
            dim = int(dim_text)
        except ValueError:
            raise ParseError(f"bad dimensionality {dim_text!r}", line=lineno) from None
        if dim <= 0:
            raise DomainError(f"line {lineno}: dimensionality must be positive, got {dim}")
        key = (instance_id, suite_id)
        if key in seen:
            raise IntegrityError(
                f"line {lineno}: duplicate instance ({instance_id!r}, {suite_id!r})"
            )
        seen.add(key)
        values = np.empty(len(feature_names))
        for j, cell in enumerate(cells[len(FEATURE_ID_COLUMNS):]):
            if cell in config.missing_markers:
                values[j] = math.nan
            else:
                try:
                    values[j] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"bad feature value {cell!r} in column {feature_names[j]!r}",
                        line=lineno,
                    ) from None
        grouped.setdefault(suite_id, []).append(
            InstanceRecord(instance_id, suite_id, dim, values)
        )

    suites = {
        sid: SuiteMatrix(sid, feature_names, tuple(records))
        for sid, records in grouped.items()
    }
    return Dataset(suites=suites)


def load_performance(path: str | Path) -> list[PerformanceRecord]:
    """Load a performance CSV in file order."""
    rows = _read_rows(path)
    _, header = rows[0]
    if tuple(header) != PERFORMANCE_COLUMNS:
        raise SchemaError(
            f"performance header must be exactly {','.join(PERFORMANCE_COLUMNS)}, got {header}"
        )
    records = []
    for lineno, cells in rows[1:]:
        if len(cells) != len(header):
            raise SchemaError(
                f"line {lineno}: expected {len(header)} columns, got {len(cells)}"
            )
        instance_id, suite_id, algorithm_id, prec_text = cells
        try:
            precision = float(prec_text)
        except ValueError:
            raise ParseError(f"bad precision {prec_text!r}", line=lineno) from None
        if math.isnan(precision) or precision < 0:
            raise DomainError(
                f"line {lineno}: median_target_precision must be >= 0, got {prec_text}"
            )
        records.append(PerformanceRecord(instance_id, suite_id, algorithm_id, precision))
    return records


def attach_performance(dataset: Dataset, records: list[PerformanceRecord]) -> Dataset:
    """Join performance records onto a feature dataset, checking integrity."""
    known = {rec.key for rec in dataset.iter_instances()}
    seen: set[tuple[str, str, str]] = set()
    for rec in records:
        if (rec.instance_id, rec.suite_id) not in known:
            raise IntegrityError(
                f"performance row ({rec.instance_id!r}, {rec.suite_id!r}, "
                f"{rec.algorithm_id!r}) references an unknown instance"
            )
        if rec.key in seen:
            raise IntegrityError(f"duplicate performance row {rec.key}")
        seen.add(rec.key)
    return Dataset(
        suites=dataset.suites,
        performance=tuple(records),
        algorithms=frozenset(rec.algorithm_id for rec in records),
    )


def validate_and_drop_incomplete(dataset: Dataset) -> tuple[Dataset, DropReport]:
    """Remove instances with missing or non-finite features from the dataset.

    Matching performance rows are removed alongside their instances. A suite
    left with fewer than two instances cannot enter any statistical
    comparison and is an error.
    """
    dropped: list[DropEntry] = []
    suites: dict[str, SuiteMatrix] = {}
    for sid, sm in dataset.suites.items():
        kept = []
        for rec in sm.rows:
            bad = int(np.sum(~np.isfinite(rec.features)))
            if bad:
                dropped.append(
                    DropEntry(rec.instance_id, sid, f"{bad} missing or non-finite feature value(s)")
                )
            else:
                rec.features.setflags(write=False)
                kept.append(rec)
        if len(kept) < 2:
            raise InsufficientDataError(
                f"suite {sid!r} has {len(kept)} complete instance(s) after validation; need >= 2"
            )
        suites[sid] = SuiteMatrix(sid, sm.feature_names, tuple(kept))

    dropped_keys = {(e.instance_id, e.suite_id) for e in dropped}
    performance = tuple(
        rec for rec in dataset.performance
        if (rec.instance_id, rec.suite_id) not in dropped_keys
    )
    cleaned = Dataset(
        suites=suites,
        performance=performance,
        algorithms=frozenset(rec.algorithm_id for rec in performance),
    )
    return cleaned, DropReport(tuple(dropped))


def load_dataset(
    features_path: str | Path,
    performance_path: str | Path | None = None,
    config: IngestConfig | None = None,
) -> Dataset:
    """Convenience loader combining feature and performance ingestion."""
    ds = load_features(features_path, config)
    if performance_path is not None:
        ds = attach_performance(ds, load_performance(performance_path))
    return ds
