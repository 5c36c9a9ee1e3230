"""
Planted-partition benchmark: recover held-out community links.

Two communities are generated with networkx; a tenth of the intra-community
edges is removed from the training graph and used as positive test pairs,
matched one-to-one with inter-community non-edges from the same source as
negatives. A second, disjoint tenth is labeled the same way and used to fit
the logistic baseline, so that both methods are scored on links the
embeddings never saw. Embeddings are trained on the remaining graph and the
top-K ranker is compared to the logistic baseline.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from src.baseline import LogRegModel, fit_baseline
from src.config import PipelineConfig
from src.embedding.model import EmbeddingMatrix
from src.embedding.trainer import TrainResult, train
from src.evaluation import ComparisonReport, Evaluator, ReportRow
from src.graph.store import HeteroGraph, ingest_triples
from src.pairs import LabeledPairSet
from src.ranking import cosine
from src.walkers import generate_corpus

logger = logging.getLogger(__name__)

NODE_PREFIX = "http://kgcomplete.local/node/"
PREDICATE = "http://kgcomplete.local/linked"


@dataclass
class PlantedSplit:
    graph: HeteroGraph
    pairs: LabeledPairSet
    communities: List[int]
    training_pairs: LabeledPairSet


@dataclass
class BenchmarkResult:
    report: ComparisonReport
    split: PlantedSplit
    embeddings: EmbeddingMatrix
    training: TrainResult
    baseline: LogRegModel
    baseline_summary: Dict[str, float]
    mean_positive_cosine: float
    mean_negative_cosine: float

    def row(self, method: str) -> ReportRow:
        for row in self.report.rows:
            if row.method == method:
                return row
        raise KeyError(method)


def node_uri(i: int) -> str:
    return f"{NODE_PREFIX}{i}"


def _community_pairs(
    graph: nx.Graph,
    membership: Sequence[int],
    held: Sequence[Tuple[int, int]],
    rng: np.random.Generator,
    provenance: str,
    taken: Optional[Set[Tuple[str, str]]] = None,
) -> LabeledPairSet:
    """Held-out edges as positives, each matched with a non-edge into the other community."""
    taken = taken or set()
    pairs = LabeledPairSet(provenance=provenance)
    for u, v in held:
        pairs.add(node_uri(u), node_uri(v), 1)
    for u, _ in held:
        others = [w for w in range(len(membership)) if membership[w] != membership[u] and not graph.has_edge(u, w)]
        for _ in range(100):
            key = (node_uri(u), node_uri(int(rng.choice(others))))
            if key not in pairs and key not in taken:
                pairs.add(*key, 0)
                break
    return pairs


def planted_split(
    communities: int = 2,
    size: int = 100,
    p_in: float = 0.1,
    p_out: float = 0.01,
    holdout: float = 0.1,
    seed: int = 42,
) -> PlantedSplit:
    """
    Generate the planted-partition graph, the held-out test pairs and the
    baseline training pairs.

    Returns:
        Training graph (both held-out edge sets removed), labeled test pairs,
        the community id of every generated node and the labeled pairs the
        baseline is fitted on
    """
    g = nx.planted_partition_graph(communities, size, p_in, p_out, seed=seed)
    membership = [i // size for i in range(communities * size)]
    rng = np.random.default_rng(seed)

    edges = sorted((min(u, v), max(u, v)) for u, v in g.edges())
    intra = [e for e in edges if membership[e[0]] == membership[e[1]]]
    n_hold = max(1, int(round(holdout * len(intra))))
    picked = rng.choice(len(intra), size=min(2 * n_hold, len(intra)), replace=False)
    held = sorted(intra[i] for i in picked[:n_hold])
    fit = sorted(intra[i] for i in picked[n_hold:])

    pairs = _community_pairs(g, membership, held, rng, "planted")
    taken = {(s, t) for s, t, _ in pairs}
    training_pairs = _community_pairs(g, membership, fit, rng, "planted:baseline", taken)

    removed = set(held) | set(fit)
    lines = [f"<{node_uri(u)}> <{PREDICATE}> <{node_uri(v)}> ." for u, v in edges if (u, v) not in removed]
    graph = ingest_triples(lines)
    logger.info(
        "planted graph nodes=%d edges=%d held_out=%d negatives=%d baseline_pairs=%d",
        graph.node_count, graph.edge_count, pairs.positives, pairs.negatives, len(training_pairs),
    )
    return PlantedSplit(graph, pairs, membership, training_pairs)


def _mean_cosine(model: EmbeddingMatrix, pairs: LabeledPairSet, label: int) -> float:
    values = [
        cosine(model.vector(s), model.vector(t))
        for s, t, y in pairs
        if y == label and s in model and t in model
    ]
    return float(np.mean(values)) if values else float("nan")


def run_planted_benchmark(
    pipeline: PipelineConfig,
    k_values: Optional[Sequence[int]] = None,
    show_progress: bool = False,
) -> BenchmarkResult:
    """
    Run the benchmark with the walk, train and baseline settings of ``pipeline``.

    The report always contains a ``topK@per-source`` row where each source's
    K is its number of held-out positives. The baseline is fitted on the
    split's own labeled pairs, so ``baseline.n_pos`` and ``baseline.n_neg``
    are not used here.
    """
    split = planted_split(seed=pipeline.seed)
    walk = pipeline.walk
    corpus = generate_corpus(split.graph, walk, show_progress=show_progress)
    training = train(corpus, pipeline.train, split.graph.node_uris, show_progress=show_progress)
    embeddings = training.model

    baseline, summary = fit_baseline(embeddings, split.training_pairs, pipeline.baseline)
    evaluator = Evaluator(
        k_values=pipeline.evaluation.k_values if k_values is None else k_values,
        feature_mode=pipeline.baseline.feature_mode,
    )
    report = evaluator.compare_report(
        embeddings, split.pairs, baseline=baseline, strategy=walk.strategy, test_set="planted"
    )
    per_source = {s: max(1, n) for s, n in split.pairs.positives_per_source().items()}
    counts, m = evaluator.evaluate_topk(embeddings, split.pairs, per_source)
    report.rows.append(ReportRow("planted", walk.strategy, "topK@per-source", counts, m))

    return BenchmarkResult(
        report=report,
        split=split,
        embeddings=embeddings,
        training=training,
        baseline=baseline,
        baseline_summary=summary,
        mean_positive_cosine=_mean_cosine(embeddings, split.pairs, 1),
        mean_negative_cosine=_mean_cosine(embeddings, split.pairs, 0),
    )


def accuracy_gap(result: BenchmarkResult) -> Tuple[str, float]:
    """Smallest |accuracy(top-K) - accuracy(logreg)| over the top-K rows, with its method."""
    base = result.row("logreg").metrics.accuracy
    gaps = [
        (row.method, abs(row.metrics.accuracy - base))
        for row in result.report.rows
        if row.method.startswith("topK@")
    ]
    return min(gaps, key=lambda item: item[1])
