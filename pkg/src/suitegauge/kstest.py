"""Two-sample Kolmogorov-Smirnov comparison of performance distributions.

D is the largest gap between the two right-continuous empirical CDFs,
evaluated at every pooled sample value so ties are handled exactly. The
p-value uses the asymptotic Kolmogorov distribution with the usual
small-sample correction to the effective sample size.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import CoverageError, DomainError
from .preprocessing import LogTargetConfig, log_transform_targets

_SERIES_EPS = 1e-12
# Below this argument the survival function is 1 to double precision.
_LAMBDA_FLOOR = 0.1


@dataclass(frozen=True)
class KSResult:
    """One two-sample KS comparison."""

    statistic_d: float
    p_value: float
    n: int
    m: int
    algorithm_id: str | None = None


@dataclass(frozen=True, eq=False)
class KSMatrix:
    """Upper-triangular per-algorithm KS comparisons across suites."""

    algorithm_id: str
    suite_ids: tuple[str, ...]
    cells: dict[tuple[str, str], KSResult]
    alpha: float
    space: str  # "log" or "raw"

    def cell(self, suite_a: str, suite_b: str) -> KSResult:
        if (suite_a, suite_b) in self.cells:
            return self.cells[(suite_a, suite_b)]
        return self.cells[(suite_b, suite_a)]

    def is_significant(self, suite_a: str, suite_b: str) -> bool:
        return self.cell(suite_a, suite_b).p_value < self.alpha

    def to_dict(self) -> dict:
        return {
            "algorithm_id": self.algorithm_id,
            "suite_ids": list(self.suite_ids),
            "alpha": self.alpha,
            "space": self.space,
            "method": "asymptotic Kolmogorov distribution, effective-n correction",
            "cells": [
                {
                    "suite_a": a,
                    "suite_b": b,
                    "statistic_d": r.statistic_d,
                    "p_value": r.p_value,
                    "n": r.n,
                    "m": r.m,
                }
                for (a, b), r in self.cells.items()
            ],
        }


def _as_finite_1d(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def ks_statistic(x, y) -> float:
    """Max absolute distance between the empirical CDFs of two samples."""
    xs = np.sort(_as_finite_1d(x, "x"))
    ys = np.sort(_as_finite_1d(y, "y"))
    pooled = np.concatenate([xs, ys])
    fx = np.searchsorted(xs, pooled, side="right") / xs.size
    fy = np.searchsorted(ys, pooled, side="right") / ys.size
    return float(np.max(np.abs(fx - fy)))


def kolmogorov_survival(lam: float) -> float:
    """Asymptotic KS survival function 2*sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lam^2)."""
    if lam < _LAMBDA_FLOOR:
        return 1.0
    total = 0.0
    for j in range(1, 1001):
        term = 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
        if abs(term) < _SERIES_EPS:
            break
        total += term
    return min(max(total, sys.float_info.min), 1.0)


def ks_pvalue(d: float, n: int, m: int) -> float:
    """Asymptotic two-sided p-value for statistic ``d`` at sample sizes n, m."""
    if n < 1 or m < 1:
        raise DomainError(f"sample sizes must be >= 1, got n={n}, m={m}")
    if not 0.0 <= d <= 1.0:
        raise DomainError(f"statistic must lie in [0, 1], got {d}")
    ne = n * m / (n + m)
    lam = (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne)) * d
    return kolmogorov_survival(lam)


def ks_test(x, y, algorithm_id: str | None = None) -> KSResult:
    """Convenience wrapper combining statistic and p-value."""
    x = _as_finite_1d(x, "x")
    y = _as_finite_1d(y, "y")
    d = ks_statistic(x, y)
    return KSResult(d, ks_pvalue(d, x.size, y.size), x.size, y.size, algorithm_id)


def performance_ks_matrix(
    dataset: Dataset,
    algorithm_id: str,
    alpha: float = 0.05,
    use_log: bool = True,
    log_cfg: LogTargetConfig | None = None,
) -> KSMatrix:
    """KS-test one algorithm's performance distribution for every suite pair.

    Samples are the algorithm's log-space targets by default (``use_log``),
    matching the modeling space; pass ``use_log=False`` for raw precision.
    The comparison is symmetric, so only unordered pairs are stored.
    """
    records = dataset.performance
    if use_log:
        records = log_transform_targets(records, log_cfg)
    samples: dict[str, list[float]] = {sid: [] for sid in dataset.suite_ids}
    for rec in records:
        if rec.algorithm_id != algorithm_id or rec.suite_id not in samples:
            continue
        samples[rec.suite_id].append(
            rec.log_target if use_log else rec.median_target_precision
        )
    for sid, vals in samples.items():
        if not vals:
            raise CoverageError(
                f"algorithm {algorithm_id!r} has no performance records for suite {sid!r}"
            )
    cells: dict[tuple[str, str], KSResult] = {}
    suite_ids = dataset.suite_ids
    for i, sa in enumerate(suite_ids):
        for sb in suite_ids[i + 1:]:
            cells[(sa, sb)] = ks_test(samples[sa], samples[sb], algorithm_id)
    return KSMatrix(
        algorithm_id=algorithm_id,
        suite_ids=suite_ids,
        cells=cells,
        alpha=alpha,
        space="log" if use_log else "raw",
    )
