"""
Pipeline commands: each runs one stage from a validated PipelineConfig.
"""

import bisect
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence

import numpy as np

from src.baseline import capped_link_counts, save_logreg, train_baseline
from src.benchmark import BenchmarkResult, run_planted_benchmark
from src.config import PipelineConfig, model_hash
from src.embedding.model import EmbeddingMatrix, load_binary, load_embeddings, save_binary, save_text
from src.embedding.trainer import TrainResult, mean_loss, train
from src.errors import ConfigError, DataError, KGCError, ModelError
from src.evaluation import ComparisonReport, Evaluator
from src.graph.cache import load_graph_cache, save_graph_cache
from src.graph.store import HeteroGraph, TypeRuleSet, load_triples_file
from src.pairs import load_labeled_pairs
from src.ranking import RankedList, predict_topk, rank_targets, write_predictions_csv, write_ranking_csv
from src.walkers import Metapath, create_walker, load_metapath_file, save_corpus
from src.walkers.edge2vec import Edge2VecWalker

logger = logging.getLogger(__name__)


def _strategy_context(strategy: str, error: KGCError) -> KGCError:
    """Same error class and attributes, message prefixed with the strategy name."""
    wrapped = type(error).__new__(type(error))
    Exception.__init__(wrapped, f"[{strategy}] {error}")
    wrapped.__dict__.update(error.__dict__)
    return wrapped


def write_manifest(path: Path, payload: Dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def load_graph(pipeline: PipelineConfig) -> HeteroGraph:
    """
    Load the graph cache written by ``ingest``.

    Raises:
        DataError: the cache does not exist
    """
    cache = pipeline.paths.graph_cache
    if not cache.exists():
        raise DataError(f"graph cache {cache} not found; run ingest first")
    return load_graph_cache(cache)


def _type_rules(pipeline: PipelineConfig) -> TypeRuleSet:
    rules = list(pipeline.graph.type_rules)
    if pipeline.paths.type_rules:
        rules.extend(TypeRuleSet.from_file(pipeline.paths.type_rules).rules)
    return TypeRuleSet(rules)


def cmd_ingest(pipeline: PipelineConfig) -> HeteroGraph:
    """Parse the triples file and write the binary graph cache."""
    pipeline.require_paths("triples")
    if pipeline.paths.type_rules:
        pipeline.require_paths("type_rules")
    graph = load_triples_file(pipeline.paths.triples, _type_rules(pipeline), pipeline.graph.skip_literals)
    save_graph_cache(graph, pipeline.paths.graph_cache)
    logger.info("graph cache written to %s", pipeline.paths.graph_cache)
    return graph


def _metapath_names(pipeline: PipelineConfig) -> List[str]:
    if pipeline.paths.metapath:
        pipeline.require_paths("metapath")
        return load_metapath_file(pipeline.paths.metapath)
    return list(pipeline.walk.metapath)


def _strategies(pipeline: PipelineConfig, strategies: Optional[Sequence[str]]) -> List[str]:
    return list(strategies) if strategies else list(pipeline.walk.strategies)


def build_corpus(
    graph: HeteroGraph,
    pipeline: PipelineConfig,
    strategy: str,
    show_progress: bool = False,
):
    """Walk corpus for one strategy and, for edge2vec, the trained transition matrix."""
    walk_config = pipeline.walk.for_strategy(strategy)
    metapath = None
    if strategy == "metapath":
        metapath = Metapath.from_names(_metapath_names(pipeline), graph.type_registry)
    walker = create_walker(graph, walk_config, metapath=metapath, show_progress=show_progress)
    corpus = walker.generate(show_progress=show_progress)
    transition = walker.matrix if isinstance(walker, Edge2VecWalker) else None
    return corpus, transition


def cmd_walk(
    pipeline: PipelineConfig,
    strategies: Optional[Sequence[str]] = None,
    fmt: str = "uri",
    show_progress: bool = False,
) -> Dict[str, Path]:
    """Generate and save walk corpora only."""
    graph = load_graph(pipeline)
    written: Dict[str, Path] = {}
    for strategy in _strategies(pipeline, strategies):
        try:
            corpus, transition = build_corpus(graph, pipeline, strategy, show_progress)
        except KGCError as e:
            raise _strategy_context(strategy, e) from e
        path = pipeline.paths.corpus_path(strategy)
        save_corpus(corpus, graph, path, fmt)
        if transition is not None:
            transition.save(pipeline.paths.artifact("transition", f"{strategy}.tsv"))
        written[strategy] = path
    return written


@dataclass
class TrainSummary:
    strategy: str
    embedding_path: Path
    text_path: Path
    manifest_path: Path
    vocab_size: int
    dim: int
    loss_trace: List[float] = field(default_factory=list)


def cmd_train(
    pipeline: PipelineConfig,
    strategies: Optional[Sequence[str]] = None,
    show_progress: bool = False,
) -> List[TrainSummary]:
    """
    Generate walks and train embeddings for each strategy.

    Writes binary and text embeddings, the corpus, the edge2vec transition
    matrix when applicable, and a JSON run manifest per strategy.
    """
    graph = load_graph(pipeline)
    summaries = []
    for strategy in _strategies(pipeline, strategies):
        try:
            summaries.append(_train_strategy(graph, pipeline, strategy, show_progress))
        except KGCError as e:
            raise _strategy_context(strategy, e) from e
    return summaries


def _train_strategy(
    graph: HeteroGraph,
    pipeline: PipelineConfig,
    strategy: str,
    show_progress: bool,
) -> TrainSummary:
    paths = pipeline.paths
    corpus, transition = build_corpus(graph, pipeline, strategy, show_progress)
    save_corpus(corpus, graph, paths.corpus_path(strategy))

    result: TrainResult = train(corpus, pipeline.train, graph.node_uris, show_progress=show_progress)
    binary_path = paths.embedding_path(strategy, binary=True)
    text_path = paths.embedding_path(strategy, binary=False)
    save_binary(result.model, binary_path, include_context=pipeline.train.save_context)
    save_text(result.model, text_path)

    artifacts = {
        "corpus": str(paths.corpus_path(strategy)),
        "embeddings_binary": str(binary_path),
        "embeddings_text": str(text_path),
    }
    if transition is not None:
        transition_path = paths.artifact("transition", f"{strategy}.tsv")
        transition.save(transition_path)
        artifacts["transition"] = str(transition_path)

    final_loss = None
    if pipeline.train.epochs > 0:
        try:
            final_loss = mean_loss(result.model, corpus, pipeline.train, graph.node_uris)
        except ModelError as e:
            logger.warning("sampled loss unavailable for %s: %s", strategy, e)

    manifest_path = paths.manifest_path(strategy)
    write_manifest(manifest_path, {
        "strategy": strategy,
        "seed": pipeline.seed,
        "config_hash": model_hash(pipeline),
        "config": pipeline.model_dump(mode="json"),
        "corpus": {
            "walks": len(corpus),
            "tokens": corpus.token_count,
            "truncated": corpus.truncated,
            "fallback_steps": corpus.fallback_steps,
            "config_hash": corpus.config_hash,
        },
        "training": {
            "vocab_size": len(result.vocab),
            "loss_trace": result.loss_trace,
            "pairs_trained": result.pairs_trained,
            "negatives_skipped": result.negatives_skipped,
            "sampled_mean_loss": final_loss,
        },
        "artifacts": artifacts,
    })
    logger.info("trained strategy=%s vocab=%d manifest=%s", strategy, len(result.vocab), manifest_path)
    return TrainSummary(
        strategy, binary_path, text_path, manifest_path,
        len(result.vocab), result.model.dim, result.loss_trace,
    )


def load_strategy_embeddings(pipeline: PipelineConfig, strategy: str) -> EmbeddingMatrix:
    path = pipeline.paths.embedding_path(strategy, binary=True)
    if not path.exists():
        raise DataError(f"embeddings {path} not found; run train first")
    return load_binary(path, expected_dim=pipeline.train.dim)


def suggest_uris(uris: Sequence[str], query: str, limit: int = 5) -> List[str]:
    """URIs sharing the longest prefix with ``query``."""
    ordered = sorted(uris)
    pos = bisect.bisect_left(ordered, query)
    window = ordered[max(0, pos - limit):pos + limit]
    if not window:
        return []

    def common(uri: str) -> int:
        return len(os.path.commonprefix([uri, query]))

    best = max(common(u) for u in window)
    return [u for u in window if common(u) == best][:limit]


def cmd_rank(
    pipeline: PipelineConfig,
    source: str,
    k: Optional[int] = None,
    strategy: Optional[str] = None,
    target_type: Optional[str] = None,
    exclude_existing: Optional[bool] = None,
    mark_existing: bool = False,
    output: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Rank candidate targets for ``source`` and write a ``target,score`` CSV.

    Raises:
        DataError: unknown source (with nearest URI suggestions) or target type
    """
    rank_config = pipeline.rank
    k = rank_config.k if k is None else k
    strategy = strategy or pipeline.walk.strategy
    target_type = target_type if target_type is not None else rank_config.target_type
    exclude_existing = rank_config.exclude_existing if exclude_existing is None else exclude_existing

    model = load_strategy_embeddings(pipeline, strategy)
    if source not in model:
        hints = suggest_uris(model.uris, source)
        hint = f"; nearest matches: {', '.join(hints)}" if hints else ""
        raise DataError(f"source not in embedding vocabulary: {source}{hint}")

    graph = load_graph(pipeline) if (target_type or exclude_existing or mark_existing) else None
    candidates: Iterator[str] = (u for u in model.uris if u != source)
    if target_type:
        type_index = graph.type_registry.node_type_index(target_type)
        candidates = (u for u in candidates if graph.contains(u) and graph.node_types[graph.index_of(u)] == type_index)

    existing: List[str] = []
    if graph is not None and graph.contains(source):
        existing = [graph.uri_of(v) for v in graph.neighbor_arrays(graph.index_of(source))[0]]
    if exclude_existing:
        present = set(existing)
        candidates = (u for u in candidates if u not in present)

    ranking: RankedList = rank_targets(model, source, candidates, k)
    out = Path(output) if output else pipeline.paths.artifact("rankings", f"{strategy}.csv")
    write_ranking_csv(ranking, out, existing if mark_existing else None)
    logger.info("ranking for %s written to %s rows=%d", source, out, len(ranking))
    return {"path": out, "ranking": ranking}


def cmd_evaluate(
    pipeline: PipelineConfig,
    strategies: Optional[Sequence[str]] = None,
    k_values: Optional[Sequence[int]] = None,
) -> Dict[str, Any]:
    """
    Train the baseline and compare it with top-K ranking on every test set.

    Writes ``reports/report.csv``, ``reports/report.txt``, per-K prediction
    CSVs, the baseline model and an evaluation manifest.
    """
    pipeline.require_paths("test_sets")
    graph = load_graph(pipeline)
    test_sets = [load_labeled_pairs(path) for path in pipeline.paths.test_sets]
    k_values = list(pipeline.evaluation.k_values if k_values is None else k_values)
    evaluator = Evaluator(k_values=k_values, feature_mode=pipeline.baseline.feature_mode)
    paths = pipeline.paths

    baseline_config = capped_link_counts(graph, pipeline.baseline)

    report = ComparisonReport()
    baselines: Dict[str, Dict[str, float]] = {}
    for strategy in _strategies(pipeline, strategies):
        try:
            model = load_strategy_embeddings(pipeline, strategy)
            baseline, summary = train_baseline(graph, model, baseline_config)
            save_logreg(baseline, paths.artifact("baseline", f"{strategy}.logreg"))
            baselines[strategy] = summary
            for pairs in test_sets:
                name = Path(pairs.provenance).stem
                report.extend(evaluator.compare_report(
                    model, pairs, k_values, baseline, strategy=strategy, test_set=name
                ))
                for k in k_values:
                    write_predictions_csv(
                        predict_topk(model, pairs, k),
                        paths.artifact("predictions", f"{strategy}_{name}_top{k}.csv"),
                    )
        except KGCError as e:
            raise _strategy_context(strategy, e) from e

    csv_path = paths.artifact("reports", "report.csv")
    table_path = paths.artifact("reports", "report.txt")
    report.write(csv_path, table_path)
    write_manifest(paths.manifest_path("evaluate"), {
        "seed": pipeline.seed,
        "config_hash": model_hash(pipeline),
        "k_values": k_values,
        "feature_mode": pipeline.baseline.feature_mode,
        "baseline_validation": baselines,
        "test_sets": {Path(p.provenance).stem: list(p.counts) for p in test_sets},
        "artifacts": {"report_csv": str(csv_path), "report_table": str(table_path)},
    })
    return {"report": report, "csv": csv_path, "table": table_path}


def cmd_inspect(pipeline: PipelineConfig, embeddings: Optional[str] = None) -> Dict[str, Any]:
    """Graph statistics from the cache, plus embedding statistics when a file is given."""
    info: Dict[str, Any] = {}
    if pipeline.paths.graph_cache.exists():
        graph = load_graph(pipeline)
        degrees = np.diff(graph.csr_offsets)
        info["graph"] = {
            "nodes": graph.node_count,
            "edges": graph.edge_count,
            "node_types": graph.type_counts(),
            "edge_types": graph.edge_type_counts(),
            "isolated": int(np.sum(degrees == 0)),
            "max_degree": int(degrees.max()) if len(degrees) else 0,
            "mean_degree": float(degrees.mean()) if len(degrees) else 0.0,
        }
    if embeddings:
        model = load_embeddings(embeddings)
        norms = np.linalg.norm(model.center, axis=1)
        info["embeddings"] = {
            "path": str(embeddings),
            "nodes": len(model),
            "dim": model.dim,
            "has_context": model.context is not None,
            "mean_norm": float(norms.mean()) if len(norms) else 0.0,
        }
    if not info:
        raise ConfigError("nothing to inspect: no graph cache and no embeddings file")
    return info


def cmd_benchmark(pipeline: PipelineConfig, show_progress: bool = False) -> BenchmarkResult:
    """Run the planted-partition benchmark and write its report."""
    result = run_planted_benchmark(pipeline, show_progress=show_progress)
    result.report.write(
        pipeline.paths.artifact("reports", "benchmark.csv"),
        pipeline.paths.artifact("reports", "benchmark.txt"),
    )
    return result


__all__ = [
    "TrainSummary",
    "cmd_benchmark",
    "cmd_evaluate",
    "cmd_ingest",
    "cmd_inspect",
    "cmd_rank",
    "cmd_train",
    "cmd_walk",
    "load_graph",
    "suggest_uris",
    "write_manifest",
]
