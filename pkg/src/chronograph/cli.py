"""Single entry-point command driving the whole pipeline.

Subcommands: ingest, features, train, eval, embed, layout, serve, report.
All randomness flows from --seed (default 0, never wall clock), so default
runs are reproducible. Dataset and output locations can also come from the
CHRONOGRAPH_DATA_DIR / CHRONOGRAPH_OUT_DIR environment variables for CI.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import models
from .bench import (
    ExperimentConfig,
    SplitSpec,
    build_features_for_mode,
    load_report_rows,
    render_table,
    run_experiment,
    temporal_split,
    train_for_config,
)
from .features import AggregateConfig, aggregate_neighbor_stats, assemble, export_feature_csv
from .graph import TemporalGraph, ingest, validate
from .service import build_layout, build_state, serve as serve_app

MODEL_ALIASES = {
    "lr": "logreg",
    "logreg": "logreg",
    "mlp": "mlp",
    "rf": "forest",
    "forest": "forest",
    "gcn": "gcn",
    "skip-gcn": "skip_gcn",
    "skip_gcn": "skip_gcn",
    "evolve": "evolve_gcn",
    "evolve-gcn": "evolve_gcn",
    "evolve_gcn": "evolve_gcn",
}

_STANDARD_NAMES = (
    ("elliptic_txs_features.csv", "elliptic_txs_edgelist.csv", "elliptic_txs_classes.csv"),
    ("features.csv", "edges.csv", "classes.csv"),
)


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data-dir", default=os.environ.get("CHRONOGRAPH_DATA_DIR"),
                   help="directory holding the three CSV files")
    p.add_argument("--features-csv", dest="features_csv", default=None)
    p.add_argument("--edges-csv", dest="edges_csv", default=None)
    p.add_argument("--classes-csv", dest="classes_csv", default=None)
    p.add_argument("--local-count", type=int, default=None,
                   help="number of leading local feature columns (default: 94 for 166-column data)")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=os.environ.get("CHRONOGRAPH_OUT_DIR", "out"),
                   help="output directory (artifacts/, reports/, series/, layouts/)")
    p.add_argument("--seed", type=int, default=0)


def _resolve_dataset(args) -> tuple[Path, Path, Path]:
    if args.features_csv and args.edges_csv and args.classes_csv:
        return Path(args.features_csv), Path(args.edges_csv), Path(args.classes_csv)
    if args.data_dir:
        base = Path(args.data_dir)
        for names in _STANDARD_NAMES:
            paths = tuple(base / n for n in names)
            if all(p.is_file() for p in paths):
                return paths
        raise FileNotFoundError(
            f"no dataset found under {base}; expected "
            + " or ".join("/".join(n) for n in _STANDARD_NAMES)
        )
    raise ValueError(
        "provide --data-dir or all of --features-csv/--edges-csv/--classes-csv"
    )


def _load_graph(args) -> TemporalGraph:
    f, e, c = _resolve_dataset(args)
    return ingest(f, e, c, local_count=args.local_count)


def _parse_weights(text: str) -> tuple[float, float]:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("class weights must be 'w_licit,w_illicit'")
    return (parts[0], parts[1])


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, choices=sorted(MODEL_ALIASES),
                   help="model family")
    p.add_argument("--features-mode", dest="features_mode", default="AF",
                   help="LF | AF | LF+NE | AF+NE (case-insensitive)")
    p.add_argument("--boundary", type=int, default=34,
                   help="temporal split boundary (train steps 1..b)")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--l2", type=float, default=None)
    p.add_argument("--hidden", type=int, default=None, help="MLP hidden width")
    p.add_argument("--estimators", type=int, default=None, help="forest size")
    p.add_argument("--max-features", dest="max_features", type=int, default=None,
                   help="features sampled per split")
    p.add_argument("--dim", type=int, default=None, help="graph-model embedding size")
    p.add_argument("--skip", action="store_true",
                   help="use the skip-connection GCN variant")
    p.add_argument("--weights", type=_parse_weights, default=(0.3, 0.7),
                   help="class weights 'w_licit,w_illicit' (default 0.3,0.7)")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for forest training")


def _collect_hyperparams(args, family: str) -> dict:
    table = {
        "logreg": {"epochs": args.epochs, "lr": args.lr, "l2": args.l2},
        "mlp": {"epochs": args.epochs, "lr": args.lr, "l2": args.l2, "hidden": args.hidden},
        "forest": {"estimators": args.estimators, "max_features": args.max_features},
        "gcn": {"epochs": args.epochs, "lr": args.lr, "d": args.dim},
        "skip_gcn": {"epochs": args.epochs, "lr": args.lr, "d": args.dim},
        "evolve_gcn": {"epochs": args.epochs, "lr": args.lr, "d": args.dim},
    }
    return {k: v for k, v in table[family].items() if v is not None}


def _config_from_args(args, retrain: bool = False) -> ExperimentConfig:
    family = MODEL_ALIASES[args.model]
    if family == "gcn" and getattr(args, "skip", False):
        family = "skip_gcn"
    return ExperimentConfig(
        model=family,
        feature_mode=args.features_mode.upper(),
        boundary=args.boundary,
        seed=args.seed,
        retrain_per_step=retrain,
        class_weights=args.weights,
        hyperparams=_collect_hyperparams(args, family),
        n_jobs=args.jobs,
    )


def cmd_ingest(args) -> int:
    graph = _load_graph(args)
    report = validate(graph)
    print(
        f"N={report.node_count} E={report.edge_count} T={report.time_step_count} "
        f"illicit={report.illicit_count} licit={report.licit_count} "
        f"unknown={report.unknown_count} cross_step_edges={report.cross_step_edge_count}"
    )
    for w in report.warnings:
        print(f"warning: {w}")
    if args.report_json:
        Path(args.report_json).parent.mkdir(parents=True, exist_ok=True)
        Path(args.report_json).write_text(
            json.dumps(report.to_dict(), sort_keys=True, separators=(",", ":")),
            encoding="utf-8",
        )
        print(f"report written to {args.report_json}")
    return 0


def cmd_features(args) -> int:
    graph = _load_graph(args)
    if args.aggregate:
        config = AggregateConfig(
            statistics=tuple(args.stats.split(",")),
            directions=tuple(args.directions.split(",")),
            source_columns=tuple(int(c) for c in args.source_cols.split(",")),
        )
        matrix = aggregate_neighbor_stats(graph, config)
    else:
        matrix = assemble(graph.nodes, args.mode.upper())
    export_feature_csv(matrix, args.export)
    print(f"{matrix.shape[0]} rows x {matrix.shape[1]} columns -> {args.export}")
    return 0


def cmd_train(args) -> int:
    graph = _load_graph(args)
    config = _config_from_args(args)
    features, _ = build_features_for_mode(config, graph)
    train_mask, _ = temporal_split(graph, SplitSpec(config.boundary))
    artifact = train_for_config(
        config, graph, features, graph.labels, train_mask,
        range(1, config.boundary + 1),
    )
    out = Path(args.out) / "artifacts" / f"{config.experiment_id}.json"
    models.save_artifact(artifact, out)
    print(f"trained {artifact.family} (seed={artifact.seed}) -> {out}")
    print(f"hyperparameters: {json.dumps(artifact.hyperparams, sort_keys=True)}")
    if artifact.loss_trace:
        print(f"final loss: {artifact.loss_trace[-1]:.6f}")
    return 0


def cmd_eval(args) -> int:
    graph = _load_graph(args)
    config = _config_from_args(args, retrain=args.retrain_per_step)
    result = run_experiment(config, graph, out_dir=args.out)
    row = result.report_row
    print(render_table([row]))
    print(f"reports -> {Path(args.out) / 'reports' / (config.experiment_id + '.json')}")
    return 0


def cmd_embed(args) -> int:
    graph = _load_graph(args)
    artifact = models.load_artifact(args.artifact)
    features = assemble(graph.nodes, "AF")
    emb = models.extract_embeddings(artifact, graph, features)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    np.save(out, emb)
    print(f"embeddings {emb.shape[0]} x {emb.shape[1]} -> {out}")
    return 0


def cmd_layout(args) -> int:
    graph = _load_graph(args)
    artifact = models.load_artifact(args.artifact) if args.artifact else None
    layout = build_layout(graph, args.mode, artifact=artifact)
    out_dir = Path(args.out) / "layouts"
    out_dir.mkdir(parents=True, exist_ok=True)
    np.save(out_dir / f"{args.mode}.npy", layout.coords)
    meta = {"mode": layout.mode, "model_ref": layout.model_ref,
            "nodes": int(layout.coords.shape[0])}
    (out_dir / f"{args.mode}.json").write_text(
        json.dumps(meta, sort_keys=True, separators=(",", ":")), encoding="utf-8"
    )
    print(f"layout '{args.mode}' for {meta['nodes']} nodes -> {out_dir}")
    return 0


def cmd_serve(args) -> int:
    graph = _load_graph(args)
    artifact = models.load_artifact(args.artifact) if args.artifact else None
    state = build_state(
        graph, artifact=artifact,
        reports_dir=args.reports_dir or args.out,
    )
    host, _, port = args.bind.partition(":")
    serve_app(state, host=host or "127.0.0.1", port=int(port or 8640),
              ui_dir=args.ui_dir)
    return 0


def cmd_report(args) -> int:
    rows = load_report_rows(args.out)
    if not rows:
        print(f"no report rows under {Path(args.out) / 'reports'}", file=sys.stderr)
        return 1
    print(render_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chronograph",
        description="Temporal transaction-graph ML toolkit and analyst service",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load the three-file dataset, validate, report")
    _add_dataset_args(p)
    _add_common(p)
    p.add_argument("--report-json", default=None, help="write the validation report here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("features", help="assemble or aggregate features, export CSV")
    _add_dataset_args(p)
    _add_common(p)
    p.add_argument("--mode", default="AF", help="LF or AF")
    p.add_argument("--aggregate", action="store_true",
                   help="compute one-hop neighbor statistics instead of selecting columns")
    p.add_argument("--stats", default="min,max,mean,std")
    p.add_argument("--directions", default="in,out")
    p.add_argument("--source-cols", dest="source_cols", default="1",
                   help="comma-separated local column indices to aggregate")
    p.add_argument("--export", required=True, help="output CSV path")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train one model family, save the artifact")
    _add_dataset_args(p)
    _add_common(p)
    _add_model_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run the temporal-split experiment, emit reports")
    _add_dataset_args(p)
    _add_common(p)
    _add_model_args(p)
    p.add_argument("--retrain-per-step", dest="retrain_per_step", action="store_true",
                   help="refit after every test step on all labels seen so far")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("embed", help="extract hidden-layer embeddings from a GCN artifact")
    _add_dataset_args(p)
    _add_common(p)
    p.add_argument("--artifact", required=True)
    p.add_argument("--output", required=True, help="output .npy path")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("layout", help="compute the global 2-D projection")
    _add_dataset_args(p)
    _add_common(p)
    p.add_argument("--mode", choices=("raw", "gcn"), default="raw")
    p.add_argument("--artifact", default=None,
                   help="trained graph-model artifact (required for --mode gcn)")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("serve", help="start the read-only analyst API")
    _add_dataset_args(p)
    _add_common(p)
    p.add_argument("--bind", default="127.0.0.1:8640", help="host:port")
    p.add_argument("--artifact", default=None,
                   help="designated model for predictions and the activation layout")
    p.add_argument("--reports-dir", dest="reports_dir", default=None)
    p.add_argument("--ui-dir", dest="ui_dir", default=None,
                   help="static UI bundle to host at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="render the report table from emitted rows")
    _add_common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, IndexError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
