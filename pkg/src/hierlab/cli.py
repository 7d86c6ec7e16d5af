"""Command-line entry point ``hierlab``.

Subcommands mirror the pipeline stages: ``generate`` writes a synthetic
dataset, ``embed`` fits a Poincare embedding, ``plot-disk`` draws it,
``curvature`` computes the edge table, ``train`` fits one classifier, ``run``
executes a multi-seed JSON config and ``analyze`` writes topology tables.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

from hierlab import generators
from hierlab.analysis import analyze
from hierlab.curvature import curvature_table, ground_from_name
from hierlab.experiment import (ExperimentConfig, RunReport, SeedResult, aggregate,
                                make_split, prepare_features, run_experiment)
from hierlab.io import (atomic_write_text, load_dataset, read_curvature, read_embedding,
                        read_labels, write_csv_dataset, write_curvature, write_embedding)
from hierlab.metrics import micro_f1, weighted_f1
from hierlab.model import ABLATIONS, train
from hierlab.plotting import disk_svg
from hierlab.splits import BANDS

log = logging.getLogger("hierlab")


def _count(text):
    """Split size: an integer count or a fraction written with a decimal point."""
    if text is None or text.lower() == "rest":
        return None
    return float(text) if "." in text else int(text)


def _add_split_args(p):
    p.add_argument("--per-class", type=_count, default=20,
                   help="training labels per class (count, or fraction like 0.1)")
    p.add_argument("--val", type=_count, default=0.1, help="validation size (count or fraction)")
    p.add_argument("--test", type=_count, default=None,
                   help="test size (count or fraction); default: all remaining labelled nodes")
    p.add_argument("--band", choices=BANDS, default=None,
                   help="draw training labels from this hierarchy band")
    p.add_argument("--split-seed", type=int, default=None,
                   help="seed for the split (defaults to --seed)")


def _split_config(args, dataset, ablate="none"):
    return ExperimentConfig(dataset=dataset, per_class=args.per_class, val=args.val,
                            test=args.test, band=args.band, ablate=ablate)


def _level_of(ds):
    return ds.annotations["level"] if ds.annotations else None


def cmd_generate(args):
    out = Path(args.out)
    if args.model == "hnm":
        g, ann = generators.hnm_generate(args.module_size, args.iterations)
    elif args.model == "hnm3":
        g, ann = generators.hnm_three_community(args.iterations, args.module_size)
    else:
        g, ann = generators.ba_generate(args.n, args.m, args.seed), None
    write_csv_dataset(out, g, ann)
    print(f"wrote {g.n} nodes, {g.num_edges} edges to {out}")
    return 0


def cmd_embed(args):
    from hierlab.hyperbolic import embed_train

    ds = load_dataset(args.dataset)
    t0 = time.perf_counter()
    emb = embed_train(ds.graph, dim=args.dim, epochs=args.epochs, lr=args.lr,
                      neg_samples=args.neg, seed=args.seed)
    write_embedding(args.out, emb)
    print(f"embedded {emb.n} nodes in {time.perf_counter() - t0:.1f}s, "
          f"final loss {emb.losses[-1]:.4f} -> {args.out}")
    return 0


def cmd_plot_disk(args):
    emb = read_embedding(args.embedding)
    labels = read_labels(args.labels, emb.n) if args.labels else None
    atomic_write_text(args.out, disk_svg(emb.points, labels))
    print(f"wrote {args.out}")
    return 0


def cmd_curvature(args):
    ds = load_dataset(args.dataset)
    g = ds.graph
    emb = read_embedding(args.embedding) if args.embedding else None
    mask = None
    if not args.no_labels and g.labels is not None:
        cfg = _split_config(args, args.dataset)
        seed = args.seed if args.split_seed is None else args.split_seed
        mask, _ = make_split(cfg, g, seed, None if emb is None else emb.norms, _level_of(ds))
    ground = ground_from_name(args.ground, g, emb)
    t0 = time.perf_counter()
    table = curvature_table(g, args.alpha, args.p, mask, args.kappa_literal, ground)
    write_curvature(args.out, table)
    print(f"{len(table)} edges, kappa in [{table.kappa.min():.4f}, {table.kappa.max():.4f}], "
          f"{time.perf_counter() - t0:.1f}s -> {args.out}")
    return 0


def cmd_train(args):
    ds = load_dataset(args.dataset)
    g = prepare_features(ds.graph, args.features)
    cfg = _split_config(args, args.dataset, args.ablate)
    cfg.alpha_margin = args.alpha_margin
    cfg.margin_sign = args.margin_sign
    cfg.epochs = args.epochs
    cfg.seeds = [args.seed]
    cfg.validate()
    tcfg = cfg.train_config()
    emb = read_embedding(args.embedding) if args.embedding else None
    if emb is None and (tcfg.use_ham or (args.band or "").startswith("q")):
        print("error: --embedding is required unless the margin is ablated", file=sys.stderr)
        return 2
    table = read_curvature(args.curvature) if args.curvature else None
    if table is None and tcfg.use_hmpnn:
        print("error: --curvature is required unless message weighting is ablated", file=sys.stderr)
        return 2
    norms = None if emb is None else emb.norms
    t0 = time.perf_counter()
    try:
        seed = args.seed if args.split_seed is None else args.split_seed
        mask, topped = make_split(cfg, g, seed, norms, _level_of(ds))
        res = train(g, norms, table, mask, tcfg, seed=args.seed)
        pred = res.predictions
        sr = SeedResult(seed=args.seed, ok=True,
                        weighted_f1=weighted_f1(pred, g.labels, mask.test),
                        micro_f1=micro_f1(pred, g.labels, mask.test),
                        val_weighted_f1=weighted_f1(pred, g.labels, mask.val) if mask.val.size else None,
                        epochs_run=res.epochs_run, best_epoch=res.best_epoch,
                        top_up_fraction=topped, losses=[float(x) for x in res.losses],
                        seconds=res.seconds)
    except Exception as exc:
        log.error("training failed: %s", exc)
        sr = SeedResult(seed=args.seed, ok=False, error=f"{type(exc).__name__}: {exc}")
    report = RunReport(asdict(cfg), [sr], aggregate([sr]), time.perf_counter() - t0)
    atomic_write_text(args.out, report.to_json())
    if sr.ok:
        print(f"test weighted-F1 {sr.weighted_f1:.4f} micro-F1 {sr.micro_f1:.4f} -> {args.out}")
    return 0 if sr.ok else 1


def cmd_run(args):
    cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    if args.out:
        cfg.out_dir = args.out
    report = run_experiment(cfg)
    agg = report.aggregate
    for s in report.seeds:
        if s.ok:
            print(f"seed {s.seed}: weighted-F1 {s.weighted_f1:.4f} micro-F1 {s.micro_f1:.4f}")
        else:
            print(f"seed {s.seed}: FAILED {s.error}")
    if agg["n_ok"]:
        print(f"weighted-F1 {agg['weighted_f1_mean']:.4f} +- {agg['weighted_f1_std']:.4f}, "
              f"micro-F1 {agg['micro_f1_mean']:.4f} +- {agg['micro_f1_std']:.4f}")
    return 0 if report.all_ok else 1


def cmd_analyze(args):
    ds = load_dataset(args.dataset)
    summary = analyze(ds.graph, args.out)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="hierlab", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    p.add_argument("--model", choices=("hnm", "hnm3", "ba"), required=True)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--module-size", type=int, default=4)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("embed", help="fit a Poincare embedding")
    p.add_argument("--dataset", required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.3)
    p.add_argument("--neg", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("plot-disk", help="SVG scatter of a 2-D embedding")
    p.add_argument("--embedding", required=True)
    p.add_argument("--labels")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot_disk)

    p = sub.add_parser("curvature", help="class-aware edge curvature table")
    p.add_argument("--dataset", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--kappa-literal", action="store_true", help="store W/d instead of 1 - W/d")
    p.add_argument("--ground", choices=("hop", "hyperbolic"), default="hop")
    p.add_argument("--embedding", help="embedding CSV (hyperbolic ground metric or quantile bands)")
    p.add_argument("--no-labels", action="store_true", help="ignore labels (plain curvature)")
    p.add_argument("--seed", type=int, default=0)
    _add_split_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("train", help="train one classifier")
    p.add_argument("--dataset", required=True)
    p.add_argument("--embedding")
    p.add_argument("--curvature")
    p.add_argument("--alpha-margin", type=float, default=1.0)
    p.add_argument("--margin-sign", choices=("ldam", "literal"), default="ldam")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--ablate", choices=ABLATIONS, default="none")
    p.add_argument("--features", choices=("auto", "identity", "given"), default="auto")
    _add_split_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run", help="multi-seed experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the config's out_dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="clustering, degree correlation and homophily tables")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
