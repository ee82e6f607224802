"""Paired training on a graph and its k-hop-similar counterpart, one-axis
parameter sweeps, and the depth/oversmoothing report."""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .generate import GenConfig, GenReport, generate_batched
from .graph import (Graph, complete_components, connected_components, floyd_warshall,
                    is_k_hop_similar, read_edge_list, write_edge_list)
from .gcn import TrainConfig, hidden_representations, normalize_adjacency, train
from .metrics import (AggregateStats, DisagreementProfile, RunPair, aggregate_runs, disagreement,
                      mean_probs_on_disagreed)
from .sbm import Dataset, SbmConfig, make_dataset

log = logging.getLogger(__name__)

AXES = ("nodes", "intra", "inter", "classes", "depth")
CSV_HEADER = ["axis_value", "acc_orig_mean", "acc_orig_std", "acc_khop_mean", "acc_khop_std",
              "disagree_mean", "disagree_std", "edges_removed_mean"]
PROBS_HEADER = ["class", "mean_prob_original", "mean_prob_khop"]
# offset for the k-hop model's init seed when the pair does not share one
INDEPENDENT_INIT_OFFSET = 7919


def run_pair(dataset: Dataset, gen_cfg: GenConfig, train_cfg: TrainConfig,
             shared_init: bool = True, khop_graph: Graph | None = None) -> tuple[RunPair, GenReport]:
    """Train the same architecture on the dataset's graph and on a k-hop-similar
    graph generated from it; features, labels and masks are shared.

    Pass ``khop_graph`` to reuse an already generated graph (the report is
    then rebuilt from the edge difference).
    """
    if train_cfg.depth != gen_cfg.k:
        raise ValueError(f"GCN depth ({train_cfg.depth}) must equal hop bound k ({gen_cfg.k})")
    if khop_graph is None:
        khop_graph, report = generate_batched(dataset.graph, gen_cfg)
    else:
        if not is_k_hop_similar(dataset.graph, khop_graph, gen_cfg.k):
            raise ValueError(f"supplied graph is not {gen_cfg.k}-hop similar to the dataset graph")
        removed = [e for e in dataset.graph.edges() if not khop_graph.adj[e]]
        if khop_graph.num_edges + len(removed) != dataset.graph.num_edges:
            raise ValueError("supplied graph is not an edge-subgraph of the dataset graph")
        report = GenReport(removed, 0, 0)

    khop_cfg = train_cfg if shared_init else replace(train_cfg, seed=train_cfg.seed + INDEPENDENT_INIT_OFFSET)
    r1 = train(dataset, train_cfg)
    r2 = train(dataset.with_graph(khop_graph), khop_cfg)
    return RunPair(r1, r2, khop_graph), report


def write_probability_csv(path, profile) -> None:
    """Plot-ready ``class,mean_prob_original,mean_prob_khop`` rows; header only
    when the models never disagree."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PROBS_HEADER)
        if profile is not None:
            for c, (p1, p2) in enumerate(zip(profile.mean_original, profile.mean_khop)):
                w.writerow([c, f"{p1:.10g}", f"{p2:.10g}"])


# -- sweeps -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    sbm: SbmConfig = field(default_factory=SbmConfig)
    gen: GenConfig = field(default_factory=GenConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    runs_per_point: int = 10
    output_path: str | None = None
    records_dir: str | None = None
    shared_init: bool = True
    accuracy_on: str = "test"
    workers: int = 1

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ValueError("sweep needs at least one axis value")
        if self.runs_per_point < 1:
            raise ValueError("runs_per_point must be >= 1")
        if self.accuracy_on not in ("test", "all"):
            raise ValueError("accuracy_on must be 'test' or 'all'")

    def configs(self, value, run: int) -> tuple[SbmConfig, GenConfig, TrainConfig]:
        """Configs for run ``run`` at one axis value; every seed is base + run."""
        seed = self.sbm.seed + run
        sbm, gen, tr = replace(self.sbm, seed=seed), replace(self.gen, seed=seed), replace(self.train, seed=seed)
        if self.axis == "nodes":
            sbm = replace(sbm, n=int(value))
        elif self.axis == "intra":
            sbm = replace(sbm, p_intra=float(value))
        elif self.axis == "inter":
            sbm = replace(sbm, p_inter=float(value))
        elif self.axis == "classes":
            sbm = replace(sbm, num_classes=int(value))
        else:
            gen, tr = replace(gen, k=int(value)), replace(tr, depth=int(value))
        return sbm, gen, tr


@dataclass
class SweepRow:
    axis_value: object
    acc_original: AggregateStats
    acc_khop: AggregateStats
    disagreement: AggregateStats
    edges_removed: AggregateStats

    def csv_fields(self) -> list[str]:
        f = lambda x: f"{x:.10g}"  # noqa: E731
        return [str(self.axis_value), f(self.acc_original.mean), f(self.acc_original.std),
                f(self.acc_khop.mean), f(self.acc_khop.std), f(self.disagreement.mean),
                f(self.disagreement.std), f(self.edges_removed.mean)]


def _run_one(spec: SweepSpec, value, run: int) -> dict:
    sbm, gen, tr = spec.configs(value, run)
    ds = make_dataset(sbm)
    pair, report = run_pair(ds, gen, tr, shared_init=spec.shared_init)
    mask = ds.mask(spec.accuracy_on)
    profile = mean_probs_on_disagreed(pair)
    record = {
        "axis": spec.axis,
        "axis_value": value,
        "run": run,
        "seed": sbm.seed,
        "k": gen.k,
        "acc_original": pair.result_original.accuracy(ds.labels, mask),
        "acc_khop": pair.result_khop.accuracy(ds.labels, mask),
        "disagreement": disagreement(pair.result_original.predictions, pair.result_khop.predictions),
        "num_edges": ds.graph.num_edges,
        "generation": report.to_json(),
        "disagreed_nodes": 0 if profile is None else profile.count,
        "mean_prob_original": None if profile is None else profile.mean_original.tolist(),
        "mean_prob_khop": None if profile is None else profile.mean_khop.tolist(),
    }
    if spec.records_dir:
        out = Path(spec.records_dir)
        stem = f"{spec.axis}_{value}_run{run}"
        write_edge_list(ds.graph, out / f"{stem}.orig.edges")
        write_edge_list(pair.khop_graph, out / f"{stem}.khop.edges")
        (out / f"{stem}.json").write_text(json.dumps(record, indent=1, sort_keys=True) + "\n")
    return record


def _run_star(args):
    return _run_one(*args)


def summarize(value, records: list[dict]) -> SweepRow:
    return SweepRow(
        value,
        aggregate_runs(r["acc_original"] for r in records),
        aggregate_runs(r["acc_khop"] for r in records),
        aggregate_runs(r["disagreement"] for r in records),
        aggregate_runs(r["generation"]["removal_count"] for r in records),
    )


def run_sweep(spec: SweepSpec, return_records: bool = False):
    """Run ``runs_per_point`` seeded pairs per axis value.

    Rows are written to ``spec.output_path`` as each point finishes, so a
    failure leaves the completed points on disk.
    """
    if spec.records_dir:
        Path(spec.records_dir).mkdir(parents=True, exist_ok=True)
    fh = writer = None
    if spec.output_path:
        fh = open(spec.output_path, "w", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        fh.flush()
    pool = ProcessPoolExecutor(spec.workers) if spec.workers > 1 else None
    rows, all_records = [], {}
    try:
        for value in spec.values:
            jobs = [(spec, value, j) for j in range(spec.runs_per_point)]
            records = list(pool.map(_run_star, jobs) if pool else map(_run_star, jobs))
            row = summarize(value, records)
            log.info("%s=%s acc %.4f/%.4f disagreement %.4f", spec.axis, value,
                     row.acc_original.mean, row.acc_khop.mean, row.disagreement.mean)
            rows.append(row)
            all_records[value] = records
            if writer:
                writer.writerow(row.csv_fields())
                fh.flush()
    finally:
        if pool:
            pool.shutdown()
        if fh:
            fh.close()
    return (rows, all_records) if return_records else rows


def pooled_probability_profile(records: list[dict]):
    """Disagreed-node mean probabilities pooled over runs, weighted by each
    run's disagreed-node count. ``None`` if no run disagreed anywhere."""
    hits = [r for r in records if r["disagreed_nodes"]]
    total = sum(r["disagreed_nodes"] for r in hits)
    if total == 0:
        return None
    p1 = sum(r["disagreed_nodes"] * np.asarray(r["mean_prob_original"]) for r in hits) / total
    p2 = sum(r["disagreed_nodes"] * np.asarray(r["mean_prob_khop"]) for r in hits) / total
    return DisagreementProfile(p1, p2, total)


def verify_records(records_dir) -> list[str]:
    """Re-check every serialized pair in a sweep's records directory; returns
    the stems whose k-hop graph is not k-hop similar to its original."""
    bad = []
    for rec_path in sorted(Path(records_dir).glob("*.json")):
        rec = json.loads(rec_path.read_text())
        stem = rec_path.name[:-len(".json")]
        g1 = read_edge_list(rec_path.parent / f"{stem}.orig.edges")
        g2 = read_edge_list(rec_path.parent / f"{stem}.khop.edges")
        if not is_k_hop_similar(g1, g2, rec["k"]):
            bad.append(stem)
    return bad


# -- oversmoothing ------------------------------------------------------------

def directional_variance(h: np.ndarray) -> float:
    """Spread of the row directions of ``h``: ``1 - |mean unit row|^2``.

    0 when every nonzero row points the same way. Row norms are divided
    out because symmetric normalization drives rows towards multiples of
    sqrt(degree) rather than towards one common vector.
    """
    norms = np.linalg.norm(h, axis=1)
    keep = norms > 0
    if not keep.any():
        return 0.0
    unit = h[keep] / norms[keep, None]
    return max(0.0, 1.0 - float(np.sum(unit.mean(axis=0) ** 2)))


@dataclass
class OversmoothingReport:
    depth: int
    num_components: int
    graphs_identical: bool
    power_complete_per_component: list[bool]
    disagreement: float
    acc_graph: float
    acc_complete: float
    # [layer][component], layer 1..depth (last entry is the output layer)
    layer_variance: list[list[float]]
    layer_raw_variance: list[list[float]]

    @property
    def variance_ratio(self) -> list[float] | None:
        """Per component: last hidden layer's directional variance over the
        first layer's. ``None`` for depth < 2 (no hidden layer)."""
        if self.depth < 2:
            return None
        first, last = self.layer_variance[0], self.layer_variance[self.depth - 2]
        return [l / f if f > 0 else 0.0 for f, l in zip(first, last)]

    def to_json(self) -> dict:
        d = asdict(self)
        d["variance_ratio"] = self.variance_ratio
        return d


def oversmoothing_demo(dataset: Dataset, depth: int, train_cfg: TrainConfig) -> OversmoothingReport:
    """Train a depth-``depth`` GCN on the graph and on its component-wise
    completion (same seed) and measure how far apart they end up, together
    with how node representations within each component contract with depth.
    Everything here is descriptive; nothing is asserted.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cfg = replace(train_cfg, depth=depth)
    g = dataset.graph
    kg = complete_components(g)
    comps = connected_components(g)
    dist = floyd_warshall(g)
    power_complete = []
    for c in range(comps.count):
        idx = np.flatnonzero(comps.labels == c)
        power_complete.append(bool((dist[np.ix_(idx, idx)] <= depth).all()))

    r_g = train(dataset, cfg)
    r_k = train(dataset.with_graph(kg), cfg)
    reps = hidden_representations(r_g.params, normalize_adjacency(g), dataset.features)
    rel, raw = [], []
    for h in reps:
        rel.append([directional_variance(h[comps.labels == c]) for c in range(comps.count)])
        raw.append([float(np.sum(h[comps.labels == c].var(axis=0))) for c in range(comps.count)])
    return OversmoothingReport(
        depth=depth,
        num_components=comps.count,
        graphs_identical=g == kg,
        power_complete_per_component=power_complete,
        disagreement=disagreement(r_g.predictions, r_k.predictions),
        acc_graph=r_g.test_accuracy,
        acc_complete=r_k.test_accuracy,
        layer_variance=rel,
        layer_raw_variance=raw,
    )
