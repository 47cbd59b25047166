"""Diverse sub-suite sampling via a similarity graph and maximal independent sets.

Instances become graph nodes; an edge joins two instances whose feature
vectors have cosine similarity at or above a threshold. A randomized greedy
sweep then extracts a maximal independent set: a diverse subset in which no
two selected instances are near-duplicates and every rejected instance is
similar to a selected one. Repeating with different seeds yields repeated
suites whose overlap can be reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .data import InstanceRecord
from .errors import ConfigError, DomainError
from .seeding import derive_seed

NodeKey = tuple[str, str]  # (instance_id, suite_id)


@dataclass(frozen=True, eq=False)
class SimilarityGraph:
    """Undirected graph over instances; adjacency is a boolean matrix."""

    node_ids: tuple[NodeKey, ...]
    adjacency: np.ndarray
    threshold: float

    @property
    def node_count(self) -> int:
        return len(self.node_ids)

    @property
    def edge_count(self) -> int:
        return int(np.sum(self.adjacency)) // 2

    def degree(self, i: int) -> int:
        return int(np.sum(self.adjacency[i]))

    @classmethod
    def from_edges(
        cls,
        node_ids: Sequence[NodeKey],
        edges: Iterable[tuple[int, int]],
        threshold: float = 0.9,
    ) -> "SimilarityGraph":
        """Build a graph directly from index pairs (test and fixture helper)."""
        k = len(node_ids)
        adj = np.zeros((k, k), dtype=bool)
        for u, v in edges:
            if u == v:
                raise DomainError(f"self-loop on node {u}")
            adj[u, v] = adj[v, u] = True
        adj.setflags(write=False)
        return cls(tuple(node_ids), adj, threshold)


@dataclass(frozen=True)
class SelectionResult:
    """One sampled sub-suite: a maximal independent set of instance keys."""

    selected: tuple[NodeKey, ...]
    seed: int
    suite_label: str


@dataclass(frozen=True, eq=False)
class OverlapReport:
    """Pairwise intersection sizes between repeated selections."""

    labels: tuple[str, ...]
    pairwise: dict[tuple[str, str], int]


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise DomainError(f"length mismatch: {u.shape} vs {v.shape}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise DomainError("vectors must be finite")
    ssu = float(np.dot(u, u))
    ssv = float(np.dot(v, v))
    if ssu == 0.0 or ssv == 0.0:
        raise DomainError("cosine similarity is undefined for a zero vector")
    sim = float(np.dot(u, v)) / float(np.sqrt(ssu * ssv))
    return min(1.0, max(-1.0, sim))


def build_similarity_graph(
    instances: Sequence[InstanceRecord],
    threshold: float,
) -> SimilarityGraph:
    """Evaluate all instance pairs and connect those with similarity >= threshold."""
    if not -1.0 <= threshold <= 1.0:
        raise ConfigError(f"threshold must lie in [-1, 1], got {threshold}")
    if len(instances) < 1:
        raise DomainError("need at least one instance")
    X = np.vstack([rec.features for rec in instances])
    if not np.all(np.isfinite(X)):
        raise DomainError("instances contain non-finite features; validate first")
    sumsq = np.einsum("ij,ij->i", X, X)
    zero = np.flatnonzero(sumsq == 0.0)
    if zero.size:
        rec = instances[int(zero[0])]
        raise DomainError(
            f"instance ({rec.instance_id!r}, {rec.suite_id!r}) has a zero feature vector"
        )
    sim = (X @ X.T) / np.sqrt(np.outer(sumsq, sumsq))
    np.clip(sim, -1.0, 1.0, out=sim)
    adj = sim >= threshold
    np.fill_diagonal(adj, False)
    adj.setflags(write=False)
    return SimilarityGraph(tuple(rec.key for rec in instances), adj, threshold)


def maximal_independent_set(
    g: SimilarityGraph,
    seed: int = 0,
    suite_label: str = "MIS",
) -> SelectionResult:
    """Randomized greedy maximal independent set, deterministic given the seed.

    Nodes are visited in a seeded shuffle order; each node is selected unless
    a neighbor was already selected. The result is independent (no internal
    edges) and maximal (every rejected node has a selected neighbor).
    """
    rng = np.random.default_rng(seed)
    order = rng.permutation(g.node_count)
    selected_mask = np.zeros(g.node_count, dtype=bool)
    picked: list[int] = []
    for i in order:
        if not np.any(g.adjacency[i] & selected_mask):
            selected_mask[i] = True
            picked.append(int(i))
    return SelectionResult(
        selected=tuple(g.node_ids[i] for i in picked),
        seed=seed,
        suite_label=suite_label,
    )


def is_valid_selection(g: SimilarityGraph, selected: Sequence[NodeKey]) -> bool:
    """Check independence and maximality of a selection against its graph."""
    index = {key: i for i, key in enumerate(g.node_ids)}
    mask = np.zeros(g.node_count, dtype=bool)
    for key in selected:
        mask[index[key]] = True
    for i in np.flatnonzero(mask):
        if np.any(g.adjacency[i] & mask):
            return False  # edge inside the selection
    for i in np.flatnonzero(~mask):
        if not np.any(g.adjacency[i] & mask):
            return False  # could still be added: not maximal
    return True


def sample_suites(
    instances: Sequence[InstanceRecord],
    threshold: float,
    count: int,
    master_seed: int = 0,
) -> tuple[list[SelectionResult], OverlapReport]:
    """Draw ``count`` repeated MIS suites labeled BS1..BScount plus overlaps."""
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    g = build_similarity_graph(instances, threshold)
    results = []
    for i in range(1, count + 1):
        label = f"BS{i}"
        results.append(
            maximal_independent_set(g, seed=derive_seed(master_seed, label), suite_label=label)
        )
    pairwise: dict[tuple[str, str], int] = {}
    for a in range(len(results)):
        for b in range(a + 1, len(results)):
            shared = set(results[a].selected) & set(results[b].selected)
            pairwise[(results[a].suite_label, results[b].suite_label)] = len(shared)
    report = OverlapReport(tuple(r.suite_label for r in results), pairwise)
    return results, report
