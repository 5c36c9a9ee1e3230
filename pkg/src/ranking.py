"""
Cosine-similarity ranking and top-K link prediction.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.embedding.model import EmbeddingMatrix
from src.errors import DataError, ModelError

logger = logging.getLogger(__name__)

FULL_SORT_FACTOR = 10

Pair = Tuple[str, str, int]


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """
    Cosine similarity clamped to [-1, 1].

    Raises:
        ModelError: dimension mismatch or a zero-norm vector
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ModelError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm = np.linalg.norm(a) * np.linalg.norm(b)
    if norm == 0:
        raise ModelError("undefined similarity: zero-norm vector")
    return float(np.clip(np.dot(a, b) / norm, -1.0, 1.0))


def cosine_scores(model: EmbeddingMatrix, source_row: int, rows: np.ndarray) -> np.ndarray:
    """Cosine of one center vector against many, clamped to [-1, 1]."""
    src = model.center[source_row]
    block = model.center[rows]
    norms = np.linalg.norm(block, axis=1) * np.linalg.norm(src)
    if np.any(norms == 0):
        bad = model.uris[source_row] if np.linalg.norm(src) == 0 else model.uris[rows[np.argmax(norms == 0)]]
        raise ModelError(f"undefined similarity: zero-norm vector for {bad}")
    return np.clip(block @ src / norms, -1.0, 1.0)


@dataclass(frozen=True)
class ScoredPair:
    source: str
    target: str
    score: float
    rank: int


@dataclass
class RankedList:
    """Candidates of one source ordered by descending score, ties by URI."""
    source: str
    entries: List[ScoredPair] = field(default_factory=list)
    skipped: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def targets(self) -> List[str]:
        return [e.target for e in self.entries]

    def scores(self) -> List[float]:
        return [e.score for e in self.entries]


def _select_top(scores: np.ndarray, uris: Sequence[str], k: int) -> List[int]:
    """Positions of the ``k`` best scores, ordered by (-score, uri)."""
    n = len(scores)
    if n > FULL_SORT_FACTOR * k:
        kth = np.partition(scores, n - k)[n - k]
        pool = np.flatnonzero(scores >= kth)
    else:
        pool = np.arange(n)
    ordered = sorted(pool.tolist(), key=lambda i: (-scores[i], uris[i]))
    return ordered[:k]


def rank_targets(
    model: EmbeddingMatrix,
    source: str,
    candidates: Iterable[str],
    k: int,
) -> RankedList:
    """
    Rank candidate targets of ``source`` by cosine similarity.

    Args:
        model: Trained embeddings
        source: Source URI
        candidates: Candidate target URIs; duplicates are ignored
        k: Number of targets to keep

    Returns:
        Top-``k`` candidates; candidates outside the vocabulary are counted in ``skipped``

    Raises:
        DataError: source not in the vocabulary, no candidate in it, or k < 1
    """
    if k < 1:
        raise DataError(f"K must be >= 1, got {k}")
    source_row = model.index_of(source)
    uris: List[str] = []
    rows: List[int] = []
    skipped = 0
    for uri in dict.fromkeys(candidates):
        row = model.row_of(uri)
        if row is None:
            skipped += 1
        else:
            uris.append(uri)
            rows.append(row)
    if not rows:
        raise DataError(f"no ranking candidates for {source} are in the embedding vocabulary")

    scores = cosine_scores(model, source_row, np.asarray(rows, dtype=np.int64))
    top = _select_top(scores, uris, k)
    entries = [ScoredPair(source, uris[i], float(scores[i]), r) for r, i in enumerate(top, start=1)]
    if skipped:
        logger.info("rank source=%s skipped=%d candidates outside the vocabulary", source, skipped)
    return RankedList(source, entries, skipped)


@dataclass(frozen=True)
class TopKPrediction:
    source: str
    target: str
    score: float
    rank: int
    predicted_label: int
    label: int


@dataclass
class TopKResult:
    predictions: List[TopKPrediction]
    excluded: List[Pair]

    @property
    def skipped(self) -> int:
        return len(self.excluded)

    def as_labels(self) -> Tuple[Dict[Tuple[str, str], int], Dict[Tuple[str, str], int]]:
        """(predicted, true) label dicts keyed by (source, target)."""
        predicted = {(p.source, p.target): p.predicted_label for p in self.predictions}
        truth = {(p.source, p.target): p.label for p in self.predictions}
        return predicted, truth


def predict_topk(
    model: EmbeddingMatrix,
    pairs: Iterable[Pair],
    k: Union[int, Mapping[str, int]],
) -> TopKResult:
    """
    Predict a link for every labeled pair whose target ranks within the top ``k``
    of its source's labeled targets.

    ``k`` is one K for every source, or a mapping from source URI to its own K.
    Pairs with a node outside the vocabulary are excluded and reported.

    Raises:
        DataError: empty pair set, K < 1, or a source missing from a K mapping
    """
    pairs = list(pairs)
    if not pairs:
        raise DataError("empty pair set")

    groups: Dict[str, List[Tuple[str, int]]] = defaultdict(list)
    excluded: List[Pair] = []
    for source, target, label in pairs:
        if source in model and target in model:
            groups[source].append((target, int(label)))
        else:
            excluded.append((source, target, int(label)))

    predictions: List[TopKPrediction] = []
    for source in sorted(groups):
        if isinstance(k, Mapping):
            if source not in k:
                raise DataError(f"no K given for source {source}")
            source_k = int(k[source])
        else:
            source_k = int(k)
        if source_k < 1:
            raise DataError(f"K must be >= 1, got {source_k} for {source}")

        targets = [t for t, _ in groups[source]]
        labels = dict(groups[source])
        rows = np.array([model.row_of(t) for t in targets], dtype=np.int64)
        scores = cosine_scores(model, model.row_of(source), rows)
        order = sorted(range(len(targets)), key=lambda i: (-scores[i], targets[i]))
        for rank, i in enumerate(order, start=1):
            predictions.append(TopKPrediction(
                source=source,
                target=targets[i],
                score=float(scores[i]),
                rank=rank,
                predicted_label=int(rank <= source_k),
                label=labels[targets[i]],
            ))
    if excluded:
        logger.info("top-K prediction excluded %d pairs outside the vocabulary", len(excluded))
    return TopKResult(predictions, excluded)


def write_predictions_csv(result: TopKResult, path: Union[str, Path]) -> None:
    """CSV ``source,target,score,rank,predicted_label``."""
    frame = pd.DataFrame(
        [(p.source, p.target, p.score, p.rank, p.predicted_label) for p in result.predictions],
        columns=["source", "target", "score", "rank", "predicted_label"],
    )
    _write_frame(frame, path)


def write_ranking_csv(
    ranking: RankedList,
    path: Union[str, Path],
    existing: Optional[Iterable[str]] = None,
) -> None:
    """CSV ``target,score`` in rank order; an ``existing`` 0/1 column when ``existing`` is given."""
    frame = pd.DataFrame({"target": ranking.targets(), "score": ranking.scores()})
    if existing is not None:
        present = set(existing)
        frame["existing"] = [int(t in present) for t in ranking.targets()]
    _write_frame(frame, path)


def _write_frame(frame: pd.DataFrame, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
