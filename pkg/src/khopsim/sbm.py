"""Synthetic node-classification data: stochastic block model graphs with
class-conditioned Gaussian features and stratified splits."""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .graph import Graph, read_edge_list, write_edge_list

SPLIT_NAMES = ("train", "val", "test")
DEFAULT_FRACTIONS = (0.6, 0.2, 0.2)


@dataclass(frozen=True)
class SbmConfig:
    n: int = 300
    num_classes: int = 2
    p_intra: float = 0.5
    p_inter: float = 0.1
    feature_dim: int = 32
    feature_variance: float = 1.0
    split: tuple[float, float, float] = DEFAULT_FRACTIONS
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.num_classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.num_classes}")
        for name in ("p_intra", "p_inter"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        if not self.feature_variance > 0:
            raise ValueError("feature_variance must be > 0")

    def with_(self, **changes) -> "SbmConfig":
        return replace(self, **changes)


@dataclass
class Dataset:
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1

    def with_graph(self, graph: Graph) -> "Dataset":
        """Same features, labels and masks on a different adjacency."""
        if graph.n != self.n:
            raise ValueError(f"graph has {graph.n} nodes, dataset has {self.n}")
        return replace(self, graph=graph)

    def mask(self, name: str) -> np.ndarray:
        return {"train": self.train_mask, "val": self.val_mask, "test": self.test_mask,
                "all": np.ones(self.n, dtype=bool)}[name]


def block_labels(n: int, num_classes: int) -> np.ndarray:
    """Contiguous, balanced block assignment: node i -> floor(i * c / n)."""
    return (np.arange(n) * num_classes) // n


def generate_sbm(cfg: SbmConfig, seed=None) -> tuple[Graph, np.ndarray]:
    """Sample the graph: every unordered pair independently, with ``p_intra``
    inside a block and ``p_inter`` across blocks."""
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    labels = block_labels(cfg.n, cfg.num_classes)
    prob = np.where(labels[:, None] == labels[None, :], cfg.p_intra, cfg.p_inter)
    iu = np.triu_indices(cfg.n, 1)
    hit = rng.random(iu[0].size) < prob[iu]
    adj = np.zeros((cfg.n, cfg.n), dtype=bool)
    adj[iu[0][hit], iu[1][hit]] = True
    adj |= adj.T
    return Graph(adj), labels


def generate_features(labels, dim: int, variance: float, seed) -> np.ndarray:
    """Row i ~ N(label_i * 1, variance * I)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if not variance > 0:
        raise ValueError("variance must be > 0")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((labels.size, dim))
    return labels[:, None].astype(np.float64) + np.sqrt(variance) * noise


def split_dataset(labels, fractions=DEFAULT_FRACTIONS, seed=0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stratified random train/val/test masks.

    Per class, ``round(count * fraction)`` nodes go to train and val and the
    rest to test.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise ValueError(f"need three positive fractions, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"split fractions must sum to 1, got {sum(fractions):g}")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    masks = [np.zeros(labels.size, dtype=bool) for _ in range(3)]
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        n_train = int(round(idx.size * fractions[0]))
        n_val = int(round(idx.size * fractions[1]))
        n_val = min(n_val, idx.size - n_train)
        masks[0][idx[:n_train]] = True
        masks[1][idx[n_train:n_train + n_val]] = True
        masks[2][idx[n_train + n_val:]] = True
    return masks[0], masks[1], masks[2]


def make_dataset(cfg: SbmConfig) -> Dataset:
    """Graph, features and split, all derived from ``cfg.seed``."""
    graph_seed, feat_seed, split_seed = np.random.SeedSequence(cfg.seed).spawn(3)
    graph, labels = generate_sbm(cfg, seed=graph_seed)
    x = generate_features(labels, cfg.feature_dim, cfg.feature_variance, feat_seed)
    train, val, test = split_dataset(labels, cfg.split, split_seed)
    return Dataset(graph, x, labels, train, val, test)


# -- files --------------------------------------------------------------------

def dataset_paths(prefix) -> dict[str, Path]:
    prefix = str(prefix)
    return {
        "graph": Path(prefix + ".edges"),
        "features": Path(prefix + ".features.csv"),
        "labels": Path(prefix + ".labels.csv"),
    }


def save_dataset(ds: Dataset, prefix) -> dict[str, Path]:
    """Write ``<prefix>.edges``, ``<prefix>.features.csv`` (one row per node,
    no header) and ``<prefix>.labels.csv`` (``node,label,split``)."""
    paths = dataset_paths(prefix)
    write_edge_list(ds.graph, paths["graph"])
    with open(paths["features"], "w", newline="") as fh:
        w = csv.writer(fh)
        for row in ds.features:
            w.writerow([repr(float(v)) for v in row])
    with open(paths["labels"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "label", "split"])
        for i in range(ds.n):
            split = "train" if ds.train_mask[i] else "val" if ds.val_mask[i] else "test"
            w.writerow([i, int(ds.labels[i]), split])
    return paths


def load_dataset(prefix, graph_path=None) -> Dataset:
    paths = dataset_paths(prefix)
    graph = read_edge_list(graph_path or paths["graph"])
    features = np.loadtxt(paths["features"], delimiter=",", dtype=np.float64, ndmin=2)
    labels = np.zeros(graph.n, dtype=np.int64)
    split = np.empty(graph.n, dtype=object)
    with open(paths["labels"], newline="") as fh:
        for row in csv.DictReader(fh):
            i = int(row["node"])
            labels[i] = int(row["label"])
            if row["split"] not in SPLIT_NAMES:
                raise ValueError(f"unknown split {row['split']!r} for node {i}")
            split[i] = row["split"]
    if features.shape[0] != graph.n or (split == None).any():  # noqa: E711
        raise ValueError("features/labels do not cover every node of the graph")
    return Dataset(graph, features, labels, split == "train", split == "val", split == "test")
