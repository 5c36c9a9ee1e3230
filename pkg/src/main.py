"""
Main entry point for kgcomplete.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, Optional, Sequence

from src.config import STRATEGIES, Config, PipelineConfig, parse_override
from src.errors import INTERNAL_ERROR_EXIT_CODE, ConfigError, KGCError
from src.logging_utils import progress_enabled, setup_logging

logger = logging.getLogger("kgcomplete")

# argparse dest -> dotted config key
FLAG_KEYS: Dict[str, str] = {
    "seed": "seed",
    "output_dir": "paths.output_dir",
    "triples": "paths.triples",
    "type_rules": "paths.type_rules",
    "metapath_file": "paths.metapath",
    "test_sets": "paths.test_sets",
    "skip_literals": "graph.skip_literals",
    "walk_length": "walk.walk_length",
    "walks_per_node": "walk.walks_per_node",
    "p": "walk.p",
    "q": "walk.q",
    "metapath": "walk.metapath",
    "em_iterations": "walk.em_iterations",
    "walk_workers": "walk.workers",
    "dim": "train.dim",
    "window": "train.window",
    "negatives": "train.negatives",
    "epochs": "train.epochs",
    "learning_rate": "train.learning_rate",
    "min_count": "train.min_count",
    "train_workers": "train.workers",
    "deterministic": "train.deterministic",
    "save_context": "train.save_context",
    "feature_mode": "baseline.feature_mode",
    "k_values": "evaluation.k_values",
}


def _add_ingest_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--triples", type=str, help="Triples file (N-Triples or 3-column TSV)")
    parser.add_argument("--type-rules", type=str, help="TSV of 'pattern<TAB>typename' rules")
    parser.add_argument("--skip-literals", action="store_true", default=None,
                        help="Skip triples with literal objects instead of failing")


def _add_walk_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--strategy", dest="strategies", action="append", choices=STRATEGIES,
                        help="Walk strategy (repeatable; default: walk.strategies)")
    parser.add_argument("--walk-length", type=int)
    parser.add_argument("--walks-per-node", type=int)
    parser.add_argument("--p", type=float, help="node2vec return parameter")
    parser.add_argument("--q", type=float, help="node2vec in-out parameter")
    parser.add_argument("--metapath", nargs="+", help="Metapath node types, e.g. compound gene compound")
    parser.add_argument("--metapath-file", type=str, help="File with one metapath node type per line")
    parser.add_argument("--em-iterations", type=int, help="edge2vec EM iterations")
    parser.add_argument("--walk-workers", type=int)


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dim", type=int)
    parser.add_argument("--window", type=int)
    parser.add_argument("--negatives", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--learning-rate", type=float)
    parser.add_argument("--min-count", type=int)
    parser.add_argument("--train-workers", type=int)
    parser.add_argument("--parallel", dest="deterministic", action="store_false", default=None,
                        help="Allow lock-free multi-worker training (non-deterministic)")
    parser.add_argument("--save-context", action="store_true", default=None,
                        help="Store context vectors in the binary embedding file")


def _add_evaluate_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--test-set", dest="test_sets", action="append",
                        help="Labeled source,target,label CSV (repeatable)")
    parser.add_argument("--k", dest="k_values", type=int, action="append",
                        help="K for top-K prediction (repeatable)")
    parser.add_argument("--feature-mode", choices=["hadamard", "concat"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgcomplete",
        description="kgcomplete - knowledge-graph embedding and completion",
    )
    parser.add_argument("--config", type=str, default=None,
                        help="Config file (default: $KGC_CONFIG or config.yaml)")
    parser.add_argument("--log-level", type=str.upper, default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--quiet", action="store_true", help="Warnings only, no progress bars")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--output-dir", type=str, default=None)
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="Override any config value (repeatable)")

    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="Parse triples and write the graph cache")
    _add_ingest_flags(ingest)

    walk = sub.add_parser("walk", help="Generate walk corpora only")
    _add_walk_flags(walk)
    walk.add_argument("--format", dest="corpus_format", choices=["uri", "index"], default="uri")

    train = sub.add_parser("train", help="Generate walks and train embeddings")
    _add_walk_flags(train)
    _add_train_flags(train)

    rank = sub.add_parser("rank", help="Top-K similarity query for one source node")
    rank.add_argument("source", type=str, help="Source node URI")
    rank.add_argument("--k", dest="rank_k", type=int, default=None)
    rank.add_argument("--strategy", dest="rank_strategy", choices=STRATEGIES, default=None)
    rank.add_argument("--target-type", type=str, default=None, help="Only rank nodes of this type")
    rank.add_argument("--exclude-existing", action="store_true", default=None,
                      help="Drop candidates already linked to the source")
    rank.add_argument("--mark-existing", action="store_true",
                      help="Add an 'existing' column flagging current neighbors")
    rank.add_argument("--output", type=str, default=None)

    evaluate = sub.add_parser("evaluate", help="Compare top-K ranking with the logistic baseline")
    evaluate.add_argument("--strategy", dest="strategies", action="append", choices=STRATEGIES)
    _add_evaluate_flags(evaluate)

    inspect = sub.add_parser("inspect", help="Print graph and embedding statistics")
    inspect.add_argument("--embeddings", type=str, default=None)

    benchmark = sub.add_parser("benchmark", help="Planted-partition recovery benchmark")
    _add_walk_flags(benchmark)
    _add_train_flags(benchmark)
    _add_evaluate_flags(benchmark)

    run = sub.add_parser("run", help="ingest, train and evaluate end to end")
    _add_ingest_flags(run)
    _add_walk_flags(run)
    _add_train_flags(run)
    _add_evaluate_flags(run)
    run.add_argument("--no-evaluate", dest="evaluate", action="store_false")

    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted config overrides from parsed flags; ``--set`` entries win."""
    overrides: Dict[str, Any] = {}
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value
    strategies = getattr(args, "strategies", None)
    if strategies:
        overrides["walk.strategies"] = strategies
        overrides["walk.strategy"] = strategies[0]
    if getattr(args, "rank_strategy", None):
        overrides["walk.strategy"] = args.rank_strategy
    for text in args.overrides:
        key, value = parse_override(text)
        overrides[key] = value
    return overrides


def load_pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    if args.config is not None and not os.path.exists(args.config):
        raise ConfigError(f"config file not found: {args.config}")
    cfg = Config(args.config)
    cfg.apply_overrides(collect_overrides(args))
    return cfg.get_pipeline_config()


def _print_graph(graph) -> None:
    stats = graph.stats
    print(f"📊 Graph: {graph.node_count} nodes, {graph.edge_count} edges")
    print("   Node types: " + ", ".join(f"{k}={v}" for k, v in sorted(graph.type_counts().items())))
    print("   Edge types: " + ", ".join(f"{k}={v}" for k, v in sorted(graph.edge_type_counts().items())))
    print(
        f"   Dropped: duplicates={stats.duplicates_dropped} self_loops={stats.self_loops_dropped} "
        f"literals={stats.literals_skipped} ignored_lines={stats.ignored_lines}"
    )


def run_command(args: argparse.Namespace, pipeline: PipelineConfig, show_progress: bool) -> None:
    from src.pipeline import commands

    if args.command == "ingest":
        graph = commands.cmd_ingest(pipeline)
        _print_graph(graph)
        print(f"\n✅ Graph cache saved to {pipeline.paths.graph_cache}")

    elif args.command == "walk":
        written = commands.cmd_walk(pipeline, fmt=args.corpus_format, show_progress=show_progress)
        for strategy, path in written.items():
            print(f"✅ {strategy}: corpus saved to {path}")

    elif args.command == "train":
        for summary in commands.cmd_train(pipeline, show_progress=show_progress):
            loss = f"{summary.loss_trace[-1]:.4f}" if summary.loss_trace else "n/a"
            print(f"✅ {summary.strategy}: {summary.vocab_size} x {summary.dim} embeddings, final epoch loss {loss}")
            print(f"   {summary.embedding_path}")
            print(f"   {summary.text_path}")
            print(f"   manifest: {summary.manifest_path}")

    elif args.command == "rank":
        result = commands.cmd_rank(
            pipeline,
            args.source,
            k=args.rank_k,
            target_type=args.target_type,
            exclude_existing=args.exclude_existing,
            mark_existing=args.mark_existing,
            output=args.output,
        )
        ranking = result["ranking"]
        print(f"🔎 Top {len(ranking)} for {args.source}")
        for entry in ranking.entries:
            print(f"   {entry.rank:>3}  {entry.target}  {entry.score!r}")
        print(f"\n✅ Ranking saved to {result['path']}")

    elif args.command == "evaluate":
        result = commands.cmd_evaluate(pipeline)
        print(result["report"].render_table())
        print(f"✅ Report saved to {result['csv']}")

    elif args.command == "inspect":
        info = commands.cmd_inspect(pipeline, args.embeddings)
        for section, values in info.items():
            print(f"📊 {section}")
            for key, value in values.items():
                print(f"   {key}: {value}")

    elif args.command == "benchmark":
        result = commands.cmd_benchmark(pipeline, show_progress=show_progress)
        print(result.report.render_table())
        print(f"   mean cosine positives={result.mean_positive_cosine:.4f} "
              f"negatives={result.mean_negative_cosine:.4f}")

    elif args.command == "run":
        from src.pipeline.orchestrator import KGCompletionPipeline

        print("🚀 Running kgcomplete pipeline...\n")
        state = KGCompletionPipeline(pipeline, show_progress).run(evaluate=args.evaluate)
        summary = state["graph_summary"]
        print(f"📊 Graph: {summary['nodes']} nodes, {summary['edges']} edges")
        for item in state["trained"]:
            print(f"✅ {item['strategy']}: {item['embeddings']}")
        if state["report_table"]:
            with open(state["report_table"], "r", encoding="utf-8") as f:
                print("\n" + f.read())
        print(f"Stages: {' -> '.join(state['completed_stages'])}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level or "INFO", args.quiet)

    try:
        pipeline = load_pipeline_config(args)
        setup_logging(args.log_level or pipeline.logging.level, args.quiet)
        run_command(args, pipeline, progress_enabled(args.quiet))
    except KGCError as e:
        logger.error("%s", e)
        logger.debug("details", exc_info=True)
        return e.exit_code
    except Exception as e:  # noqa: BLE001
        logger.error("internal error: %s", e, exc_info=logger.isEnabledFor(logging.DEBUG))
        return INTERNAL_ERROR_EXIT_CODE
    return 0


if __name__ == "__main__":
    sys.exit(main())
