"""Train-suite-fitted standardization and log-space target transformation.

Scaling parameters are always learned on the designated training suite and
then applied unchanged to any evaluation suite; this asymmetry is what makes
suite-comparison matrices direction-dependent. Targets are modeled in log
space, with a positive floor so that instances solved to (or below) the
target precision map to a finite value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .data import PerformanceRecord, SuiteMatrix
from .errors import ConfigError, DomainError, InsufficientDataError, SchemaError


@dataclass(frozen=True, eq=False)
class ScalerParams:
    """Per-feature mean and scale fitted on one suite."""

    feature_names: tuple[str, ...]
    means: np.ndarray
    scales: np.ndarray
    fitted_on: str


@dataclass(frozen=True)
class LogTargetConfig:
    """Log-space transform: log_base(max(precision, floor))."""

    floor: float = 1e-8
    base: float = 10.0

    def __post_init__(self):
        if not self.floor > 0:
            raise ConfigError(f"log floor must be positive, got {self.floor}")
        if not self.base > 0 or self.base == 1.0:
            raise ConfigError(f"log base must be positive and != 1, got {self.base}")

    def apply(self, precision: float) -> float:
        clamped = max(precision, self.floor)
        if self.base == 10.0:
            return math.log10(clamped)
        return math.log(clamped) / math.log(self.base)


def fit_scaler(train: SuiteMatrix) -> ScalerParams:
    """Fit per-column mean and population standard deviation on a suite.

    Zero-variance columns are recorded with scale 0; :func:`apply_scaler`
    maps them to 0 instead of dividing.
    """
    if train.k < 2:
        raise InsufficientDataError(
            f"suite {train.suite_id!r} has k={train.k}; need >= 2 to fit a scaler"
        )
    m = train.matrix
    if not np.all(np.isfinite(m)):
        raise DomainError(
            f"suite {train.suite_id!r} contains non-finite features; validate first"
        )
    means = m.mean(axis=0)
    scales = m.std(axis=0)  # population std, denominator k
    means.setflags(write=False)
    scales.setflags(write=False)
    return ScalerParams(train.feature_names, means, scales, train.suite_id)


def apply_scaler(params: ScalerParams, m: SuiteMatrix) -> SuiteMatrix:
    """Standardize a suite with previously fitted parameters."""
    if m.feature_names != params.feature_names:
        raise SchemaError(
            f"feature names of suite {m.suite_id!r} do not match scaler fitted on "
            f"{params.fitted_on!r}"
        )
    nonzero = params.scales != 0.0
    rows = []
    for rec in m.rows:
        scaled = np.zeros_like(rec.features)
        scaled[nonzero] = (rec.features[nonzero] - params.means[nonzero]) / params.scales[nonzero]
        scaled.setflags(write=False)
        rows.append(replace(rec, features=scaled))
    return SuiteMatrix(m.suite_id, m.feature_names, tuple(rows))


def log_transform_targets(
    records: list[PerformanceRecord] | tuple[PerformanceRecord, ...],
    cfg: LogTargetConfig | None = None,
) -> list[PerformanceRecord]:
    """Fill ``log_target`` on each record; original precision is preserved."""
    cfg = cfg or LogTargetConfig()
    out = []
    for rec in records:
        if rec.median_target_precision < 0:
            raise DomainError(
                f"negative precision for {rec.key}: {rec.median_target_precision}"
            )
        out.append(replace(rec, log_target=cfg.apply(rec.median_target_precision)))
    return out
