"""Generate k-hop-similar graphs by deleting edges that leave every k-hop
neighborhood intact.

Two greedy generators share one acceptance rule: a deletion is kept only
if the thresholded distance matrix ``dist <= k`` is unchanged. The
batched generator trades completeness for fewer distance recomputations
and stops once a removal budget is met. A brute-force enumerator serves
as a test oracle on tiny graphs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import Graph, _check_k, bfs_all_pairs, floyd_warshall, reachability_by_powers

REACH_METHODS = ("floyd", "powers")


@dataclass(frozen=True)
class GenConfig:
    k: int = 2
    threshold_fraction: float = 0.20
    batch_size: int | None = None
    seed: int = 0
    reach_method: str = "floyd"

    def __post_init__(self):
        _check_k(self.k)
        if not 0.0 <= self.threshold_fraction <= 1.0:
            raise ValueError(f"threshold_fraction must lie in [0, 1], got {self.threshold_fraction}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.reach_method not in REACH_METHODS:
            raise ValueError(f"reach_method must be one of {REACH_METHODS}")

    def removal_threshold(self, num_edges: int) -> int:
        return int(np.floor(self.threshold_fraction * num_edges + 1e-9))

    def effective_batch_size(self, num_edges: int) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return max(1, self.removal_threshold(num_edges) // 2)


@dataclass
class GenReport:
    removed_edges: list[tuple[int, int]] = field(default_factory=list)
    batches_tried: int = 0
    batches_accepted: int = 0

    @property
    def removal_count(self) -> int:
        return len(self.removed_edges)

    def to_json(self) -> dict:
        return {
            "removed": [[i, j] for i, j in self.removed_edges],
            "removal_count": self.removal_count,
            "batches_tried": self.batches_tried,
            "batches_accepted": self.batches_accepted,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GenReport":
        return cls([(int(i), int(j)) for i, j in obj["removed"]],
                   int(obj["batches_tried"]), int(obj["batches_accepted"]))


def _shuffled_edges(g: Graph, seed: int) -> list[tuple[int, int]]:
    edges = g.edges()
    order = np.random.default_rng(seed).permutation(len(edges))
    return [edges[i] for i in order]


class _ReachChecker:
    """Answers "does this adjacency keep the reference k-hop reachability?"."""

    def __init__(self, g: Graph, k: int, method: str):
        self.k = k
        self.method = method
        if method == "floyd":
            self.reach = floyd_warshall(g) <= k
        else:
            self.reach = reachability_by_powers(g, k)

    def preserved(self, adj: np.ndarray) -> bool:
        if self.method == "floyd":
            return _kernels.reach_equal(_kernels.floyd_warshall(adj), self.k, self.reach)
        return bool(np.array_equal(reachability_by_powers(Graph(adj), self.k), self.reach))


def generate_basic(g: Graph, k: int, seed: int = 0, reach_method: str = "floyd") -> tuple[Graph, GenReport]:
    """Single greedy pass: try deleting each edge once, in seeded random order."""
    k = _check_k(k)
    checker = _ReachChecker(g, k, reach_method)
    adj = g.adj.copy()
    report = GenReport()
    for i, j in _shuffled_edges(g, seed):
        adj[i, j] = adj[j, i] = False
        report.batches_tried += 1
        if checker.preserved(adj):
            report.batches_accepted += 1
            report.removed_edges.append((i, j))
        else:
            adj[i, j] = adj[j, i] = True
    return Graph(adj), report


def generate_batched(g: Graph, cfg: GenConfig) -> tuple[Graph, GenReport]:
    """Delete seeded-shuffled edges a batch at a time until the removal budget
    ``floor(threshold_fraction * |E|)`` is reached or the edges run out.

    A batch is kept whole or restored whole; there is no per-edge retry.
    The last accepted batch may overshoot the budget by up to
    ``batch_size - 1`` edges.
    """
    edges = _shuffled_edges(g, cfg.seed)
    threshold = cfg.removal_threshold(len(edges))
    b = cfg.effective_batch_size(len(edges))
    report = GenReport()
    adj = g.adj.copy()
    if threshold == 0:
        return Graph(adj), report

    checker = _ReachChecker(g, _check_k(cfg.k), cfg.reach_method)
    for start in range(0, len(edges), b):
        batch = edges[start:start + b]
        trial = adj.copy()
        for i, j in batch:
            trial[i, j] = trial[j, i] = False
        report.batches_tried += 1
        if checker.preserved(trial):
            adj = trial
            report.batches_accepted += 1
            report.removed_edges.extend(batch)
        if report.removal_count >= threshold:
            break
    return Graph(adj), report


def brute_force_removal_oracle(g: Graph, k: int, max_edges: int = 12) -> list[frozenset]:
    """Every inclusion-maximal edge set whose deletion keeps k-hop reachability.

    Enumerates all 2^|E| subsets, so it refuses graphs with more than
    ``max_edges`` edges. Distances come from BFS, not the kernels.
    """
    k = _check_k(k)
    edges = g.edges()
    m = len(edges)
    if m > max_edges:
        raise ValueError(f"graph has {m} edges; brute force is limited to {max_edges}")
    ref = bfs_all_pairs(g) <= k

    removable = np.zeros(1 << m, dtype=bool)
    for mask in range(1 << m):
        adj = g.adj.copy()
        for e in range(m):
            if mask >> e & 1:
                i, j = edges[e]
                adj[i, j] = adj[j, i] = False
        removable[mask] = np.array_equal(bfs_all_pairs(Graph(adj)) <= k, ref)

    maximal = []
    for mask in range(1 << m):
        if not removable[mask]:
            continue
        # removable sets are closed under taking subsets, so one-edge
        # extensions are enough to test maximality
        if any(removable[mask | 1 << e] for e in range(m) if not mask >> e & 1):
            continue
        maximal.append(frozenset(edges[e] for e in range(m) if mask >> e & 1))
    return maximal

