"""Random-forest regressor built on greedy variance-minimizing CART trees.

The defaults mirror the common regression-forest configuration: 100 trees,
all features considered at every split, bootstrap resampling, leaves down to
a single sample. Every source of randomness is an explicit stream derived
from ``(seed, tree index)``, so fits are bit-reproducible and trees could be
grown in parallel without changing the result.

Splits are chosen by minimizing the summed squared error of the two children,
with candidate thresholds at midpoints between consecutive distinct sorted
values. Ties are broken toward the lowest feature index, then the lowest
threshold. Predictions average per-tree leaf means and are clamped to the
range of the training targets, so the model never extrapolates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, InsufficientDataError, SchemaError

_PURE_NODE_VARIANCE = 1e-12
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ForestConfig:
    """Hyperparameters of the forest."""

    n_trees: int = 100
    max_features: float = 1.0
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    max_depth: int | None = None
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError(f"n_trees must be >= 1, got {self.n_trees}")
        if not 0.0 < self.max_features <= 1.0:
            raise ConfigError(f"max_features must be in (0, 1], got {self.max_features}")
        if self.min_samples_leaf < 1:
            raise ConfigError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.min_samples_split < 2:
            raise ConfigError(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1 or None, got {self.max_depth}")


@dataclass(frozen=True, eq=False)
class Tree:
    """One regression tree as flat arrays; leaves have feature == -1."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def node_count(self) -> int:
        return self.feature.size


@dataclass(frozen=True, eq=False)
class ForestModel:
    """A fitted forest plus the information needed to apply and serialize it."""

    trees: tuple[Tree, ...]
    config: ForestConfig
    n_features: int
    train_target_range: tuple[float, float]


class _TreeBuilder:
    """Grows one tree; node arrays are appended in depth-first order."""

    def __init__(self, X, y, cfg: ForestConfig, n_candidate_features: int, rng):
        self.X = X
        self.y = y
        self.cfg = cfg
        self.m = n_candidate_features
        self.n = X.shape[1]
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(math.nan)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(math.nan)
        return len(self.feature) - 1

    def _candidate_features(self) -> np.ndarray:
        if self.m >= self.n:
            return np.arange(self.n)
        # sorted ascending so ties resolve to the lowest feature index
        return np.sort(self.rng.choice(self.n, size=self.m, replace=False))

    def _best_split(self, idx: np.ndarray):
        """Return (feature, threshold) minimizing child SSE, or None."""
        count = idx.size
        leaf = self.cfg.min_samples_leaf
        feats = self._candidate_features()
        Xn = self.X[np.ix_(idx, feats)]
        order = np.argsort(Xn, axis=0, kind="stable")
        xs = np.take_along_axis(Xn, order, axis=0)
        ys = self.y[idx][order]
        cs = np.cumsum(ys, axis=0)
        css = np.cumsum(ys * ys, axis=0)
        total = cs[-1]
        total_sq = css[-1]
        counts = np.arange(1, count, dtype=float)[:, None]
        sse_left = css[:-1] - cs[:-1] ** 2 / counts
        sum_right = total - cs[:-1]
        sse_right = (total_sq - css[:-1]) - sum_right**2 / (count - counts)
        cost = sse_left + sse_right
        valid = xs[1:] > xs[:-1]
        if leaf > 1:
            pos = np.arange(1, count)[:, None]
            valid &= (pos >= leaf) & (count - pos >= leaf)
        cost = np.where(valid, cost, np.inf)
        # column-major flatten: first minimum is lowest feature, then lowest threshold
        flat = cost.T.ravel()
        best = int(np.argmin(flat))
        if not np.isfinite(flat[best]):
            return None
        col, boundary = divmod(best, count - 1)
        c = boundary + 1
        thr = 0.5 * (xs[c - 1, col] + xs[c, col])
        return int(feats[col]), float(thr)

    def build(self, idx: np.ndarray) -> Tree:
        stack = [(self._new_node(), idx, 0)]
        while stack:
            node, rows, depth = stack.pop()
            y_node = self.y[rows]
            mean = float(np.mean(y_node))
            self.value[node] = mean
            if rows.size < self.cfg.min_samples_split:
                continue
            if float(np.mean((y_node - mean) ** 2)) < _PURE_NODE_VARIANCE:
                continue
            if self.cfg.max_depth is not None and depth >= self.cfg.max_depth:
                continue
            split = self._best_split(rows)
            if split is None:
                continue
            feat, thr = split
            mask = self.X[rows, feat] <= thr
            self.feature[node] = feat
            self.threshold[node] = thr
            left_id = self._new_node()
            right_id = self._new_node()
            self.left[node] = left_id
            self.right[node] = right_id
            # push right first so the left branch is laid out next (preorder)
            stack.append((right_id, rows[~mask], depth + 1))
            stack.append((left_id, rows[mask], depth + 1))
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold, dtype=float),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            value=np.asarray(self.value, dtype=float),
        )


def fit_forest(X, y, cfg: ForestConfig | None = None) -> ForestModel:
    """Fit a regression forest on rows ``X`` and targets ``y``.

    Each tree sees a seeded bootstrap resample (or the full sample with
    ``bootstrap=False``) and draws its per-split feature subsets from its own
    stream, so the fit is deterministic given ``cfg.seed``.
    """
    cfg = cfg or ForestConfig()
    X = np.ascontiguousarray(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2:
        raise ShapeErrorFrom(X.ndim)
    k, n = X.shape
    if y.size != k:
        raise SchemaError(f"X has {k} rows but y has {y.size} values")
    if k < 2:
        raise InsufficientDataError(f"need at least 2 training rows, got {k}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DomainError("training data contains non-finite values")
    m = min(n, max(1, math.ceil(cfg.max_features * n)))
    trees = []
    for t in range(cfg.n_trees):
        rng = np.random.default_rng((cfg.seed, t))
        idx = rng.integers(0, k, size=k) if cfg.bootstrap else np.arange(k)
        trees.append(_TreeBuilder(X, y, cfg, m, rng).build(idx))
    return ForestModel(
        trees=tuple(trees),
        config=cfg,
        n_features=n,
        train_target_range=(float(np.min(y)), float(np.max(y))),
    )


def ShapeErrorFrom(ndim):  # small helper kept out of the hot path
    from .errors import ShapeError

    return ShapeError(f"X must be a 2-D matrix, got ndim={ndim}")


def _tree_predict(tree: Tree, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        node = 0
        while tree.feature[node] >= 0:
            if X[i, tree.feature[node]] <= tree.threshold[node]:
                node = tree.left[node]
            else:
                node = tree.right[node]
        out[i] = tree.value[node]
    return out


def predict(model: ForestModel, X) -> np.ndarray:
    """Average the per-tree leaf means; clamped to the training target range."""
    X = np.ascontiguousarray(np.asarray(X, dtype=float))
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise SchemaError(
            f"query matrix must have {model.n_features} columns, got shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise DomainError("query matrix contains non-finite values")
    acc = np.zeros(X.shape[0])
    for tree in model.trees:
        acc += _tree_predict(tree, X)
    preds = acc / len(model.trees)
    lo, hi = model.train_target_range
    return np.clip(preds, lo, hi)


def model_to_dict(model: ForestModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "config": {
            "n_trees": model.config.n_trees,
            "max_features": model.config.max_features,
            "min_samples_leaf": model.config.min_samples_leaf,
            "min_samples_split": model.config.min_samples_split,
            "max_depth": model.config.max_depth,
            "bootstrap": model.config.bootstrap,
            "seed": model.config.seed,
        },
        "n_features": model.n_features,
        "train_target_range": list(model.train_target_range),
        "trees": [
            {
                "feature": t.feature.tolist(),
                "threshold": [None if math.isnan(v) else v for v in t.threshold.tolist()],
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "value": t.value.tolist(),
            }
            for t in model.trees
        ],
    }


def model_from_dict(doc: dict) -> ForestModel:
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise SchemaError(f"unsupported model format_version {version!r}")
    cfg = ForestConfig(**doc["config"])
    trees = tuple(
        Tree(
            feature=np.asarray(t["feature"], dtype=np.int32),
            threshold=np.asarray(
                [math.nan if v is None else v for v in t["threshold"]], dtype=float
            ),
            left=np.asarray(t["left"], dtype=np.int32),
            right=np.asarray(t["right"], dtype=np.int32),
            value=np.asarray(t["value"], dtype=float),
        )
        for t in doc["trees"]
    )
    return ForestModel(
        trees=trees,
        config=cfg,
        n_features=int(doc["n_features"]),
        train_target_range=tuple(doc["train_target_range"]),
    )


def save_model(model: ForestModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), sort_keys=True, indent=None) + "\n",
        encoding="utf-8",
    )


def load_model(path: str | Path) -> ForestModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
