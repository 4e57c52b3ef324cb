"""Command-line entry point.

Subcommands: stats, extract, evaluate, demo-fig1, gen-synth. Every command is
reproducible from its arguments and seed; parallelism (--jobs) never changes
output bytes. Exit codes: 0 success, 2 usage error, 3 data/format error,
4 convergence/capacity error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .classify import CVReport, ModelSpec, cross_validate
from .dynamics import build_walk_operator, numeric_assortativity
from .errors import (
    ArgumentError,
    CapacityError,
    ConvergenceError,
    DynfeatError,
    FormatError,
    GenerationError,
)
from .features import (
    FeatureConfig,
    bio_default_config,
    export_csv,
    extract_features,
    extract_fixed_vertex_features,
    greedy_forward_selection,
    parse_config,
    social_default_config,
)
from .graphs import (
    Dataset,
    dataset_stats,
    generate_topology,
    load_tu_dataset,
    load_weighted_graphs,
    save_weighted_graphs,
)
from . import attributes as attr_mod
from . import synth

DATA_DIR_ENV = "DYNFEAT_DATA_DIR"

FIG1_TOPOLOGIES = ("communities3", "ring", "clique", "erdos_renyi", "star", "regular")
FIG1_ER_P = 0.4
FIG1_TIMES = tuple(range(11))

STATS_HEADER = "name,num_graphs,classes,node_labels,avg_nodes,avg_edges"
REPORT_HEADER = "dataset,model,mean_acc,std_acc"


def _dataset_dir(args) -> Path:
    if args.dataset_dir:
        return Path(args.dataset_dir)
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env)
    raise ArgumentError(
        f"no dataset directory: pass --dataset-dir or set {DATA_DIR_ENV}")


def _load_dataset(args) -> Dataset:
    """Resolve --name under the dataset dir: a directory holds TU files, a
    plain file holds weighted edge records."""
    base = _dataset_dir(args)
    candidate = base / args.name
    if candidate.is_dir():
        return load_tu_dataset(candidate, args.name)
    if candidate.is_file():
        return load_weighted_graphs(candidate)
    if base.is_dir() and (base / f"{args.name}_A.txt").is_file():
        return load_tu_dataset(base, args.name)
    raise FormatError(f"no dataset named {args.name!r} under {base}")


def _load_config(args, ds: Dataset) -> FeatureConfig:
    if args.config:
        cfg = parse_config(args.config)
    elif ds.label_universe:
        cfg = bio_default_config()
    else:
        cfg = social_default_config()
    if getattr(args, "fixed_vertex", False):
        from dataclasses import replace
        cfg = replace(cfg, fixed_vertex_mode=True)
    return cfg


def _extract(ds: Dataset, cfg: FeatureConfig, jobs: int):
    if cfg.fixed_vertex_mode:
        return extract_fixed_vertex_features(ds, cfg, jobs=jobs)
    return extract_features(ds, cfg, jobs=jobs)


def cmd_stats(args) -> int:
    ds = _load_dataset(args)
    print(STATS_HEADER)
    print(dataset_stats(ds).as_csv_row())
    return 0


def cmd_extract(args) -> int:
    ds = _load_dataset(args)
    cfg = _load_config(args, ds)
    fm = _extract(ds, cfg, args.jobs)
    export_csv(fm, args.out)
    print(f"wrote {fm.num_rows} rows x {len(fm.column_names)} features to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    ds = _load_dataset(args)
    cfg = _load_config(args, ds)
    fm = _extract(ds, cfg, args.jobs)
    spec = ModelSpec(kind="linear_svm" if args.model == "svm" else "random_forest",
                     seed=args.seed)
    if cfg.selection == "greedy_forward":
        groups = greedy_forward_selection(fm, fm.class_labels, spec, seed=args.seed)
        from .features import attribute_groups
        cols = [c for g in groups for c in attribute_groups(fm.column_names)[g]]
        fm = fm.select_columns(cols)
        print(f"selected groups: {','.join(groups)}")
    report = cross_validate(fm, None, spec, folds=args.folds,
                            repeats=args.repeats, seed=args.seed, jobs=args.jobs)
    _print_report(ds.name, args.model, report)
    if args.out:
        lines = [REPORT_HEADER,
                 f"{ds.name},{args.model},{report.mean_accuracy:.4f},{report.std_accuracy:.4f}"]
        Path(args.out).write_text("\n".join(lines) + "\n")
    return 0


def _print_report(name: str, model: str, report: CVReport) -> None:
    print(f"{'dataset':<16} {'model':<6} {'mean_acc':>9} {'std_acc':>8} {'seconds':>8}")
    print(f"{name:<16} {model:<6} {report.mean_accuracy:>9.4f} "
          f"{report.std_accuracy:>8.4f} {report.runtime_seconds:>8.1f}")


def cmd_demo_fig1(args) -> int:
    """Covariance-vs-time curves of the subdominant eigenvector attribute on
    six toy topologies."""
    lines = ["topology,t,u"]
    for kind in FIG1_TOPOLOGIES:
        g = generate_topology(kind, args.n, p=FIG1_ER_P, seed=args.seed)
        walk = build_walk_operator(g)
        attr, _ = attr_mod.second_left_eigenvector(g)
        u = numeric_assortativity(walk, attr.v, FIG1_TIMES)
        for t in FIG1_TIMES:
            lines.append(f"{kind},{t},{u[t]!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_gen_synth(args) -> int:
    if args.kind == "fixed_vertex":
        ds = synth.generate_fixed_vertex_dataset(
            seed=args.seed, n=args.n,
            class_sizes=(args.graphs_a, args.graphs_b),
            p_within=args.p_within, p_between=args.p_between)
    else:
        ds = synth.generate_planted_signal_dataset(
            seed=args.seed, graphs_per_class=args.graphs_per_class)
    save_weighted_graphs(ds, args.out)
    print(f"wrote {ds.num_graphs} graphs to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynfeat",
        description="Random-walk assortativity features for graph classification")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_dataset_args(p):
        p.add_argument("--dataset-dir", default=None,
                       help=f"dataset root (default: ${DATA_DIR_ENV})")
        p.add_argument("--name", required=True, help="dataset name under the root")

    def add_common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker processes (default: available cores)")

    p = sub.add_parser("stats", help="print summary dataset statistics")
    add_dataset_args(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("extract", help="extract features to CSV")
    add_dataset_args(p)
    p.add_argument("--config", default=None, help="key = value feature config file")
    p.add_argument("--out", required=True)
    p.add_argument("--fixed-vertex", action="store_true", dest="fixed_vertex",
                   help="append per-vertex one-hot covariance features")
    add_common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="repeated cross-validated accuracy")
    add_dataset_args(p)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None, help="report CSV path")
    p.add_argument("--model", choices=("svm", "rf"), default="svm")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--fixed-vertex", action="store_true", dest="fixed_vertex")
    add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("demo-fig1",
                       help="eigenvector covariance curves on six toy topologies")
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_demo_fig1)

    p = sub.add_parser("gen-synth", help="generate a synthetic dataset")
    p.add_argument("--kind", choices=("fixed_vertex", "planted_signal"),
                   default="fixed_vertex")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=synth.FIXED_VERTEX_N)
    p.add_argument("--graphs-a", type=int, default=synth.FIXED_VERTEX_CLASS_SIZES[0])
    p.add_argument("--graphs-b", type=int, default=synth.FIXED_VERTEX_CLASS_SIZES[1])
    p.add_argument("--p-within", type=float, default=synth.P_WITHIN)
    p.add_argument("--p-between", type=float, default=synth.P_BETWEEN)
    p.add_argument("--graphs-per-class", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConvergenceError, CapacityError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ArgumentError, DynfeatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
