"""Undirected simple graphs on a dense adjacency matrix, plus the exact
structural machinery built on them: hop distances, k-hop reachability,
graph powers, similarity tests and connected components.
"""
from __future__ import annotations

from collections import deque
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from . import _kernels
from ._kernels import INFINITY


class Graph:
    """Immutable undirected simple graph stored as a symmetric boolean
    adjacency matrix with an all-false diagonal."""

    __slots__ = ("_adj",)

    def __init__(self, adj):
        a = np.array(adj, dtype=bool, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("graph needs at least one node")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if a.diagonal().any():
            raise ValueError("self-loops are not allowed")
        a.setflags(write=False)
        self._adj = a

    @property
    def adj(self) -> np.ndarray:
        return self._adj

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(self._adj)) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(i, j)`` with ``i < j`` in row-major order."""
        rows, cols = np.nonzero(np.triu(self._adj, 1))
        return [(int(i), int(j)) for i, j in zip(rows, cols)]

    def without_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        a = self._adj.copy()
        for i, j in edges:
            a[i, j] = a[j, i] = False
        return Graph(a)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return np.array_equal(self._adj, other._adj)

    def __hash__(self):
        return hash((self.n, np.packbits(self._adj).tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


class ComponentPartition(NamedTuple):
    labels: np.ndarray
    count: int


def from_edge_list(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    if n < 1:
        raise ValueError(f"node count must be positive, got {n}")
    a = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) has an endpoint outside [0, {n})")
        if i == j:
            raise ValueError(f"self-loop ({i}, {i}) is not allowed")
        a[i, j] = a[j, i] = True
    return Graph(a)


def complete_graph(n: int) -> Graph:
    return Graph(~np.eye(n, dtype=bool))


def empty_graph(n: int) -> Graph:
    return Graph(np.zeros((n, n), dtype=bool))


def path_graph(n: int) -> Graph:
    return from_edge_list(n, [(i, i + 1) for i in range(n - 1)])


# -- distances ----------------------------------------------------------------

def floyd_warshall(g: Graph) -> np.ndarray:
    """Hop-count distance matrix (int32); unreachable pairs hold ``INFINITY``."""
    return _kernels.floyd_warshall(g.adj)


def bfs_all_pairs(g: Graph) -> np.ndarray:
    """Same contract as :func:`floyd_warshall`, by one BFS per source.

    Deliberately plain Python so it stays independent of the kernels.
    """
    n = g.n
    nbrs = [np.flatnonzero(g.adj[v]).tolist() for v in range(n)]
    dist = np.full((n, n), INFINITY, dtype=np.int32)
    for s in range(n):
        row = dist[s]
        row[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            du = row[u] + 1
            for w in nbrs[u]:
                if row[w] == INFINITY:
                    row[w] = du
                    queue.append(w)
    return dist


def _check_k(k: int) -> int:
    if int(k) != k or k < 1:
        raise ValueError(f"hop bound k must be an integer >= 1, got {k!r}")
    # anything past INFINITY behaves the same and would overflow int32
    return int(min(k, INFINITY - 1))


def k_hop_reachability(dist: np.ndarray, k: int) -> np.ndarray:
    """Boolean ``dist <= k``; the diagonal is always true."""
    k = _check_k(k)
    return np.asarray(dist) <= k


def reachability_by_powers(g: Graph, k: int) -> np.ndarray:
    """``(I + A + A^2 + ... + A^k) > 0`` via thresholded matrix products.

    Agrees with ``k_hop_reachability(floyd_warshall(g), k)`` exactly but
    costs k BLAS products instead of an O(n^3) scalar loop.
    """
    k = _check_k(k)
    step = g.adj.astype(np.float64)
    np.fill_diagonal(step, 1.0)
    reach = step > 0
    for _ in range(min(k, g.n) - 1):
        nxt = (reach.astype(np.float64) @ step) > 0
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    return reach


def power_graph(g: Graph, k: int) -> Graph:
    reach = k_hop_reachability(floyd_warshall(g), k).copy()
    np.fill_diagonal(reach, False)
    return Graph(reach)


def is_k_hop_similar(g1: Graph, g2: Graph, k: int) -> bool:
    """True iff both graphs have the same binary k-hop reachability matrix
    under the identity node correspondence."""
    if g1.n != g2.n:
        raise ValueError(f"node counts differ: {g1.n} vs {g2.n}")
    r1 = k_hop_reachability(floyd_warshall(g1), k)
    r2 = k_hop_reachability(floyd_warshall(g2), k)
    return bool(np.array_equal(r1, r2))


# -- components ---------------------------------------------------------------

def connected_components(g: Graph) -> ComponentPartition:
    """Component ids numbered 0.. in order of each component's smallest node."""
    n = g.n
    labels = np.full(n, -1, dtype=np.int64)
    count = 0
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = count
        stack = [s]
        while stack:
            u = stack.pop()
            for w in np.flatnonzero(g.adj[u]):
                if labels[w] < 0:
                    labels[w] = count
                    stack.append(int(w))
        count += 1
    return ComponentPartition(labels, count)


def complete_components(g: Graph) -> Graph:
    """Replace every connected component by the complete graph on its nodes."""
    labels = connected_components(g).labels
    a = labels[:, None] == labels[None, :]
    np.fill_diagonal(a, False)
    return Graph(a)


def diameter(g: Graph) -> int:
    """Largest finite hop distance, or ``INFINITY`` for a disconnected graph."""
    dist = floyd_warshall(g)
    if (dist >= INFINITY).any():
        return int(INFINITY)
    return int(dist.max())


def edge_difference(g1: Graph, g2: Graph) -> int:
    """Number of unordered node pairs whose adjacency differs."""
    if g1.n != g2.n:
        raise ValueError(f"node counts differ: {g1.n} vs {g2.n}")
    return int(np.count_nonzero(np.triu(g1.adj ^ g2.adj, 1)))


# -- edge-list files ----------------------------------------------------------

def parse_edge_list(text: str) -> Graph:
    """Parse ``n m`` followed by ``m`` lines ``i j``; ``#`` starts a comment line."""
    lines = [ln.split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln[0].startswith("#")]
    if not lines:
        raise ValueError("edge list is empty (missing 'n m' header)")
    try:
        n, m = (int(x) for x in lines[0][:2])
        if len(lines[0]) != 2:
            raise ValueError
        edges = []
        for ln in lines[1:]:
            if len(ln) != 2:
                raise ValueError
            edges.append((int(ln[0]), int(ln[1])))
    except ValueError:
        raise ValueError("malformed edge list: expected integer pairs") from None
    if len(edges) != m:
        raise ValueError(f"header announces {m} edges but {len(edges)} were listed")
    return from_edge_list(n, edges)


def format_edge_list(g: Graph) -> str:
    edges = g.edges()
    out = [f"{g.n} {len(edges)}"]
    out.extend(f"{i} {j}" for i, j in edges)
    return "\n".join(out) + "\n"


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g))
