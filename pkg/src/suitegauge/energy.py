"""Multivariate energy two-sample test with permutation p-values.

The statistic for samples P (k1 rows) and Q (k2 rows) in the same feature
space is

    (k1*k2/(k1+k2)) * ( 2*mean cross distance
                        - mean within-P distance
                        - mean within-Q distance )

with plain Euclidean norms and the within means taken over all ordered pairs
(diagonal included, contributing zeros). It is zero exactly when the two
samples coincide as multisets and strictly positive otherwise.

Distance sums are accumulated with exact (compensated) summation over a fixed
row-major order, which makes the statistic bit-for-bit symmetric in (P, Q),
invariant under row shuffles, and identical between the standalone evaluation
and the pooled-matrix block evaluation used inside the permutation loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import Dataset
from .errors import ConfigError, DomainError, InsufficientDataError, ShapeError
from .preprocessing import apply_scaler, fit_scaler
from .seeding import derive_seed

SCALING_MODES = ("row", "none")


@dataclass(frozen=True)
class EnergyTestResult:
    """Outcome of one permutation energy test."""

    statistic: float
    p_value: float
    permutations: int
    seed: int
    significant: bool


@dataclass(frozen=True, eq=False)
class PValueMatrix:
    """All-pairs suite comparison; rows fit the scaler, so cells are directed."""

    suite_ids: tuple[str, ...]
    cells: dict[tuple[str, str], EnergyTestResult]
    scaling_mode: str
    alpha: float
    permutations: int
    seed: int

    def cell(self, row_suite: str, col_suite: str) -> EnergyTestResult:
        return self.cells[(row_suite, col_suite)]

    def to_dict(self) -> dict:
        return {
            "suite_ids": list(self.suite_ids),
            "scaling_mode": self.scaling_mode,
            "alpha": self.alpha,
            "permutations": self.permutations,
            "seed": self.seed,
            "cells": [
                {
                    "row_suite": a,
                    "col_suite": b,
                    "statistic": r.statistic,
                    "p_value": r.p_value,
                    "permutations": r.permutations,
                    "seed": r.seed,
                    "significant": r.significant,
                }
                for (a, b), r in self.cells.items()
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PValueMatrix":
        cells = {
            (c["row_suite"], c["col_suite"]): EnergyTestResult(
                statistic=c["statistic"],
                p_value=c["p_value"],
                permutations=c["permutations"],
                seed=c["seed"],
                significant=c["significant"],
            )
            for c in d["cells"]
        }
        return cls(
            suite_ids=tuple(d["suite_ids"]),
            cells=cells,
            scaling_mode=d["scaling_mode"],
            alpha=d["alpha"],
            permutations=d["permutations"],
            seed=d["seed"],
        )


def _exact_sum(block: np.ndarray) -> float:
    # math.fsum is correctly rounded, so equal multisets of distances sum to
    # equal floats no matter how rows were permuted.
    return math.fsum(block.ravel().tolist())


def _combine(s_pp: float, s_qq: float, s_pq: float, k1: int, k2: int) -> float:
    cross = 2.0 * s_pq / (k1 * k2)
    within = s_pp / (k1 * k1) + s_qq / (k2 * k2)
    return (k1 * k2 / (k1 + k2)) * (cross - within)


def _as_sample(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be a 2-D matrix, got ndim={arr.ndim}")
    if arr.shape[0] < 1:
        raise InsufficientDataError(f"{name} must have at least one row")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def energy_statistic(P, Q) -> float:
    """Energy distance statistic between two samples over the same columns."""
    P = _as_sample(P, "P")
    Q = _as_sample(Q, "Q")
    if P.shape[1] != Q.shape[1]:
        raise ShapeError(
            f"column mismatch: P has {P.shape[1]} features, Q has {Q.shape[1]}"
        )
    s_pq = _exact_sum(cdist(P, Q))
    s_pp = _exact_sum(cdist(P, P))
    s_qq = _exact_sum(cdist(Q, Q))
    return _combine(s_pp, s_qq, s_pq, P.shape[0], Q.shape[0])


def _stat_from_blocks(D: np.ndarray, idx1: np.ndarray, idx2: np.ndarray) -> float:
    s_pp = _exact_sum(D[np.ix_(idx1, idx1)])
    s_qq = _exact_sum(D[np.ix_(idx2, idx2)])
    s_pq = _exact_sum(D[np.ix_(idx1, idx2)])
    return _combine(s_pp, s_qq, s_pq, len(idx1), len(idx2))


def permutation_pvalue(
    P,
    Q,
    permutations: int = 199,
    seed: int = 0,
    alpha: float = 0.05,
) -> EnergyTestResult:
    """Permutation test for equality of the two sample distributions.

    The pooled rows are re-split ``permutations`` times into groups of the
    original sizes by a seeded shuffle; the p-value is
    ``(1 + #{permuted statistic >= observed}) / (permutations + 1)``, so it is
    always positive and an exact multiple of ``1/(permutations+1)``. Each
    replicate draws its shuffle from an independent stream derived from
    ``(seed, replicate index)``, so results do not depend on evaluation order.
    """
    if permutations < 1:
        raise ConfigError(f"permutation count must be >= 1, got {permutations}")
    P = _as_sample(P, "P")
    Q = _as_sample(Q, "Q")
    if P.shape[1] != Q.shape[1]:
        raise ShapeError(
            f"column mismatch: P has {P.shape[1]} features, Q has {Q.shape[1]}"
        )
    k1, k2 = P.shape[0], Q.shape[0]
    if k1 + k2 < 4:
        raise InsufficientDataError(
            f"need at least 4 pooled rows for a permutation test, got {k1 + k2}"
        )
    pool = np.vstack([P, Q])
    D = cdist(pool, pool)
    idx = np.arange(k1 + k2)
    observed = _stat_from_blocks(D, idx[:k1], idx[k1:])

    at_least = 0
    for r in range(1, permutations + 1):
        rng = np.random.default_rng((seed, r))
        perm = rng.permutation(k1 + k2)
        stat = _stat_from_blocks(D, perm[:k1], perm[k1:])
        if stat >= observed:
            at_least += 1
    p_value = (1 + at_least) / (permutations + 1)
    return EnergyTestResult(
        statistic=observed,
        p_value=p_value,
        permutations=permutations,
        seed=seed,
        significant=p_value <= alpha,
    )


def suite_comparison_matrix(
    dataset: Dataset,
    alpha: float = 0.05,
    permutations: int = 199,
    seed: int = 0,
    scaling_mode: str = "row",
) -> PValueMatrix:
    """Run the energy test for every ordered pair of suites in the dataset.

    With ``scaling_mode="row"`` the scaler is fitted on the row suite and
    applied to both suites of the pair, mirroring the train/test protocol;
    with ``"none"`` raw features are compared. Per-cell seeds derive from the
    master seed and the pair's suite ids.
    """
    if scaling_mode not in SCALING_MODES:
        raise ConfigError(f"scaling_mode must be one of {SCALING_MODES}, got {scaling_mode!r}")
    suite_ids = dataset.suite_ids
    if len(suite_ids) < 2:
        raise InsufficientDataError("need at least two suites to compare")
    cells: dict[tuple[str, str], EnergyTestResult] = {}
    for row_id in suite_ids:
        for col_id in suite_ids:
            if row_id == col_id:
                continue
            row_suite = dataset.suite(row_id)
            col_suite = dataset.suite(col_id)
            if scaling_mode == "row":
                params = fit_scaler(row_suite)
                P = apply_scaler(params, row_suite).matrix
                Q = apply_scaler(params, col_suite).matrix
            else:
                P = row_suite.matrix
                Q = col_suite.matrix
            cells[(row_id, col_id)] = permutation_pvalue(
                P,
                Q,
                permutations=permutations,
                seed=derive_seed(seed, row_id, col_id),
                alpha=alpha,
            )
    return PValueMatrix(
        suite_ids=suite_ids,
        cells=cells,
        scaling_mode=scaling_mode,
        alpha=alpha,
        permutations=permutations,
        seed=seed,
    )
