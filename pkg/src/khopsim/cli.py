"""Command-line entry point: ``khopsim <subcommand> ...``.

Any flag can also come from a JSON file given with ``--config``; keys are
the flag names with dashes replaced by underscores. Flags on the command
line win over the file.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__, _kernels
from .experiments import (AXES, SweepSpec, oversmoothing_demo, pooled_probability_profile,
                          run_pair, run_sweep, verify_records, write_probability_csv)
from .gcn import TrainConfig, save_checkpoint, train
from .generate import GenConfig, generate_basic, generate_batched
from .graph import format_edge_list, is_k_hop_similar, power_graph, read_edge_list, write_edge_list
from .metrics import disagreement, mean_probs_on_disagreed
from .sbm import SbmConfig, load_dataset, make_dataset, save_dataset

log = logging.getLogger("khopsim")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_sbm_flags(p):
    g = p.add_argument_group("dataset")
    g.add_argument("--n", type=int, default=300, help="node count (default: 300)")
    g.add_argument("--classes", type=int, default=2, help="number of blocks/classes (default: 2)")
    g.add_argument("--p-intra", type=float, default=0.5, help="within-block edge probability (default: 0.5)")
    g.add_argument("--p-inter", type=float, default=0.1, help="between-block edge probability (default: 0.1)")
    g.add_argument("--feature-dim", type=int, default=32, help="feature dimension (default: 32)")
    g.add_argument("--feature-variance", type=float, default=1.0)
    g.add_argument("--split", type=_floats, default=(0.6, 0.2, 0.2), help="train,val,test fractions")


def _add_gen_flags(p, with_k=True):
    g = p.add_argument_group("k-hop generation")
    if with_k:
        g.add_argument("--k", type=int, default=2, help="hop bound (default: 2)")
    g.add_argument("--threshold-frac", type=float, default=0.2,
                   help="removal budget as a fraction of edges (default: 0.2)")
    g.add_argument("--batch-size", type=int, default=None, help="edges per batch (default: half the budget)")
    g.add_argument("--reach-method", choices=("floyd", "powers"), default="floyd")


def _add_train_flags(p, with_depth=True):
    g = p.add_argument_group("training")
    if with_depth:
        g.add_argument("--depth", type=int, default=None, help="GCN layers (default: k, or 2)")
    g.add_argument("--hidden", type=int, default=32)
    g.add_argument("--lr", type=float, default=0.01)
    g.add_argument("--epochs", type=int, default=200)
    g.add_argument("--patience", type=int, default=50)
    g.add_argument("--accuracy-on", choices=("test", "all"), default="test")


def _sbm_cfg(a) -> SbmConfig:
    return SbmConfig(n=a.n, num_classes=a.classes, p_intra=a.p_intra, p_inter=a.p_inter,
                     feature_dim=a.feature_dim, feature_variance=a.feature_variance,
                     split=tuple(a.split), seed=a.seed)


def _gen_cfg(a) -> GenConfig:
    return GenConfig(k=a.k, threshold_fraction=a.threshold_frac, batch_size=a.batch_size,
                     seed=a.seed, reach_method=a.reach_method)


def _train_cfg(a, depth=None) -> TrainConfig:
    depth = depth or getattr(a, "depth", None) or getattr(a, "k", None) or 2
    return TrainConfig(learning_rate=a.lr, max_epochs=a.epochs, patience=a.patience,
                       seed=a.seed, depth=depth, hidden=a.hidden)


def _write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- subcommands --------------------------------------------------------------

def cmd_gen_sbm(a):
    ds = make_dataset(_sbm_cfg(a))
    paths = save_dataset(ds, a.out)
    print(f"wrote {ds.n} nodes, {ds.graph.num_edges} edges: " + ", ".join(str(p) for p in paths.values()))


def cmd_khop_gen(a):
    g = read_edge_list(a.input)
    if a.basic:
        out, report = generate_basic(g, a.k, seed=a.seed, reach_method=a.reach_method)
    else:
        out, report = generate_batched(g, _gen_cfg(a))
    write_edge_list(out, a.output)
    if a.report:
        _write_json(a.report, report.to_json())
    print(f"removed {report.removal_count} of {g.num_edges} edges "
          f"({report.batches_accepted}/{report.batches_tried} batches accepted)", file=sys.stderr)


def cmd_check_similar(a):
    print("true" if is_k_hop_similar(read_edge_list(a.first), read_edge_list(a.second), a.k) else "false")


def cmd_power(a):
    text = format_edge_list(power_graph(read_edge_list(a.input), a.k))
    if a.output:
        Path(a.output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_train(a):
    ds = load_dataset(a.dataset, graph_path=a.graph)
    cfg = _train_cfg(a)
    result = train(ds, cfg)
    record = {
        "accuracy": result.accuracy(ds.labels, ds.mask(a.accuracy_on)),
        "accuracy_on": a.accuracy_on,
        "best_epoch": result.best_epoch,
        "epochs_run": len(result.val_loss) - 1,
        "train_loss": result.train_loss,
        "val_loss": result.val_loss,
        "predictions": result.predictions.tolist(),
    }
    if a.checkpoint:
        save_checkpoint(a.checkpoint, result.params, cfg.seed, best_epoch=result.best_epoch)
    _write_json(a.record, record)


def cmd_pair(a):
    ds = load_dataset(a.dataset)
    gen = _gen_cfg(a)
    tr = _train_cfg(a, depth=a.k)
    khop = read_edge_list(a.khop_graph) if a.khop_graph else None
    pair, report = run_pair(ds, gen, tr, shared_init=not a.independent_init, khop_graph=khop)
    r1, r2 = pair.result_original, pair.result_khop
    mask = ds.mask(a.accuracy_on)
    summary = {
        "acc_original": r1.accuracy(ds.labels, mask),
        "acc_khop": r2.accuracy(ds.labels, mask),
        "accuracy_on": a.accuracy_on,
        "disagreement": disagreement(r1.predictions, r2.predictions),
        "k": gen.k,
        "seed": a.seed,
        "shared_init": not a.independent_init,
        "generation": report.to_json(),
    }
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "label", "split", "pred_original", "pred_khop"])
        for i in range(ds.n):
            split = "train" if ds.train_mask[i] else "val" if ds.val_mask[i] else "test"
            w.writerow([i, int(ds.labels[i]), split, int(r1.predictions[i]), int(r2.predictions[i])])
    if a.probs:
        write_probability_csv(a.probs, mean_probs_on_disagreed(pair))
    if a.khop_output:
        write_edge_list(pair.khop_graph, a.khop_output)
    _write_json(a.summary, summary)


def cmd_sweep(a):
    spec = SweepSpec(
        axis=a.axis,
        values=tuple(int(v) if a.axis in ("nodes", "classes", "depth") else float(v) for v in a.values.split(",")),
        sbm=_sbm_cfg(a), gen=_gen_cfg(a), train=_train_cfg(a, depth=a.k),
        runs_per_point=a.runs, output_path=a.out, records_dir=a.records_dir,
        shared_init=not a.independent_init, accuracy_on=a.accuracy_on, workers=a.workers,
    )
    rows, records = run_sweep(spec, return_records=True)
    if a.probs_dir:
        Path(a.probs_dir).mkdir(parents=True, exist_ok=True)
        for value, recs in records.items():
            write_probability_csv(Path(a.probs_dir) / f"probs_{a.axis}_{value}.csv", pooled_probability_profile(recs))
    if a.records_dir and a.verify:
        bad = verify_records(a.records_dir)
        if bad:
            raise RuntimeError(f"{len(bad)} serialized pairs failed the k-hop check: {bad[:5]}")
        print(f"verified {len(list(Path(a.records_dir).glob('*.json')))} serialized pairs", file=sys.stderr)
    print(f"wrote {len(rows)} rows to {a.out}", file=sys.stderr)


def cmd_oversmooth(a):
    ds = load_dataset(a.dataset) if a.dataset else make_dataset(_sbm_cfg(a))
    report = oversmoothing_demo(ds, a.depth, _train_cfg(a, depth=a.depth))
    _write_json(a.out, report.to_json())


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="khopsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({_kernels.BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--seed", type=int, default=0, help="RNG seed (default: 0)")
        p.add_argument("--config", help="JSON file with default values for any flag")
        p.add_argument("-v", "--verbose", action="store_true")
        p.set_defaults(func=func)
        return p

    p = add("gen-sbm", cmd_gen_sbm, "sample an SBM dataset and write it to disk")
    _add_sbm_flags(p)
    p.add_argument("--out", required=True, help="output prefix for .edges/.features.csv/.labels.csv")

    p = add("khop-gen", cmd_khop_gen, "generate a k-hop-similar graph by edge removal")
    p.add_argument("--input", required=True, help="input edge list")
    p.add_argument("--output", required=True, help="output edge list")
    p.add_argument("--report", help="write the generation report as JSON")
    p.add_argument("--basic", action="store_true", help="single-edge greedy pass, no budget")
    _add_gen_flags(p)

    p = add("check-similar", cmd_check_similar, "print whether two graphs are k-hop similar")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--k", type=int, required=True)

    p = add("power", cmd_power, "emit the k-th power of a graph as an edge list")
    p.add_argument("input")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--output", help="file to write (default: stdout)")

    p = add("train", cmd_train, "train a GCN on a saved dataset")
    p.add_argument("--dataset", required=True, help="dataset prefix written by gen-sbm")
    p.add_argument("--graph", help="train on this edge list instead of the dataset's graph")
    p.add_argument("--checkpoint", help="write weights (JSON header + .bin payload)")
    p.add_argument("--record", default="-", help="JSON run record (default: stdout)")
    _add_train_flags(p)

    p = add("pair", cmd_pair, "train on a graph and on its k-hop-similar counterpart")
    p.add_argument("--dataset", required=True, help="dataset prefix written by gen-sbm")
    p.add_argument("--khop-graph", help="use this k-hop-similar edge list instead of generating one")
    p.add_argument("--out", required=True, help="per-node predictions CSV")
    p.add_argument("--summary", default="-", help="JSON summary (default: stdout)")
    p.add_argument("--probs", help="disagreed-node mean probability CSV")
    p.add_argument("--khop-output", help="write the k-hop-similar graph used")
    p.add_argument("--independent-init", action="store_true", help="different init seed for the second model")
    _add_gen_flags(p)
    _add_train_flags(p, with_depth=False)

    p = add("sweep", cmd_sweep, "vary one parameter and aggregate paired runs into a CSV")
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--runs", type=int, default=10, help="runs per axis value (default: 10)")
    p.add_argument("--out", required=True, help="results CSV")
    p.add_argument("--records-dir", help="per-run JSON records and edge lists")
    p.add_argument("--verify", action="store_true", help="re-check serialized pairs after the sweep")
    p.add_argument("--probs-dir", help="per-value disagreed-node probability CSVs")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--independent-init", action="store_true")
    _add_sbm_flags(p)
    _add_gen_flags(p)
    _add_train_flags(p, with_depth=False)

    p = add("oversmooth", cmd_oversmooth, "compare a deep GCN on a graph and on its completed components")
    p.add_argument("--dataset", help="dataset prefix (default: sample one from the SBM flags)")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--out", default="-", help="JSON report (default: stdout)")
    _add_sbm_flags(p)
    _add_train_flags(p, with_depth=False)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    config = json.loads(Path(known.config).read_text())
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            dests = {a.dest for a in sp._actions}
            unknown = set(config) - dests
            sp.set_defaults(**{k: v for k, v in config.items() if k in dests})
            if unknown:
                log.debug("config keys not used by %s: %s", sp.prog, sorted(unknown))


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValueError) as exc:
        parser.error(f"cannot read config: {exc}")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"khopsim {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
