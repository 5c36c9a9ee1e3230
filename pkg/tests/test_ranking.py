"""
Tests for cosine ranking and top-K prediction.
"""

import math

import numpy as np
import pandas as pd
import pytest

from src.embedding.model import EmbeddingMatrix
from src.errors import DataError, ModelError
from src.ranking import (
    cosine,
    predict_topk,
    rank_targets,
    write_predictions_csv,
    write_ranking_csv,
)


def test_cosine_values():
    assert cosine([1.0, 0.0], [2.0, 0.0]) == 1.0
    assert cosine([1.0, 0.0], [0.0, 3.0]) == 0.0
    assert cosine([1.0, 1.0], [-1.0, -1.0]) == pytest.approx(-1.0)
    assert cosine([1.0, 1.0], [1.0, 0.0]) == pytest.approx(1 / math.sqrt(2))


def test_cosine_errors():
    with pytest.raises(ModelError, match="undefined similarity"):
        cosine([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ModelError, match="dimension mismatch"):
        cosine([1.0, 0.0], [1.0, 0.0, 0.0])


def test_rank_targets_order(toy_embeddings):
    ranking = rank_targets(toy_embeddings, "s", ["t4", "t3", "t2", "t1"], k=3)
    assert ranking.targets() == ["t1", "t2", "t3"]
    assert [e.rank for e in ranking.entries] == [1, 2, 3]
    assert ranking.scores()[0] == pytest.approx(1 / math.sqrt(1.01))
    assert ranking.scores() == sorted(ranking.scores(), reverse=True)


def test_rank_targets_k_larger_than_candidates(toy_embeddings):
    ranking = rank_targets(toy_embeddings, "s", ["t2", "t1"], k=10)
    assert ranking.targets() == ["t1", "t2"]


def test_rank_targets_ties_break_by_uri():
    model = EmbeddingMatrix(["s", "b", "a", "c"], np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]))
    assert rank_targets(model, "s", ["c", "b", "a"], k=2).targets() == ["a", "b"]


def test_partial_selection_matches_full_sort():
    rng = np.random.default_rng(5)
    uris = ["src"] + [f"n{i:03d}" for i in range(200)]
    model = EmbeddingMatrix(uris, rng.normal(size=(201, 6)))
    top = rank_targets(model, "src", uris[1:], k=5)
    scores = {u: cosine(model.vector("src"), model.vector(u)) for u in uris[1:]}
    expected = sorted(scores, key=lambda u: (-scores[u], u))[:5]
    assert top.targets() == expected


def test_rank_targets_skips_unknown_candidates(toy_embeddings):
    ranking = rank_targets(toy_embeddings, "s", ["t1", "ghost", "t2"], k=5)
    assert ranking.targets() == ["t1", "t2"]
    assert ranking.skipped == 1


def test_rank_targets_errors(toy_embeddings):
    with pytest.raises(DataError):
        rank_targets(toy_embeddings, "s", ["t1"], k=0)
    with pytest.raises(DataError, match="not in embedding vocabulary"):
        rank_targets(toy_embeddings, "ghost", ["t1"], k=1)
    with pytest.raises(DataError, match="no ranking candidates"):
        rank_targets(toy_embeddings, "s", ["ghost"], k=1)


PAIRS = [
    ("s", "t1", 1),
    ("s", "t3", 0),
    ("s", "t2", 1),
    ("s", "t4", 0),
    ("s", "ghost", 1),
]


def test_predict_topk_labels(toy_embeddings):
    result = predict_topk(toy_embeddings, PAIRS, k=2)
    predicted, truth = result.as_labels()
    assert predicted == {("s", "t1"): 1, ("s", "t2"): 1, ("s", "t3"): 0, ("s", "t4"): 0}
    assert truth == {("s", "t1"): 1, ("s", "t2"): 1, ("s", "t3"): 0, ("s", "t4"): 0}
    assert result.skipped == 1
    assert result.excluded == [("s", "ghost", 1)]
    assert [p.rank for p in result.predictions] == [1, 2, 3, 4]


def test_predict_topk_k_covers_all_targets(toy_embeddings):
    result = predict_topk(toy_embeddings, PAIRS, k=100)
    assert all(p.predicted_label == 1 for p in result.predictions)


def test_predict_topk_per_source_k(toy_embeddings):
    result = predict_topk(toy_embeddings, PAIRS, k={"s": 1})
    assert [p.target for p in result.predictions if p.predicted_label] == ["t1"]
    with pytest.raises(DataError, match="no K given"):
        predict_topk(toy_embeddings, PAIRS, k={"t1": 1})


def test_predict_topk_groups_by_source(toy_embeddings):
    pairs = [("t3", "t4", 0), ("t3", "t2", 1), ("s", "t1", 1)]
    result = predict_topk(toy_embeddings, pairs, k=1)
    assert [(p.source, p.target) for p in result.predictions] == [("s", "t1"), ("t3", "t2"), ("t3", "t4")]


def test_predict_topk_errors(toy_embeddings):
    with pytest.raises(DataError, match="empty pair set"):
        predict_topk(toy_embeddings, [], k=1)
    with pytest.raises(DataError):
        predict_topk(toy_embeddings, PAIRS, k=0)


def test_ranking_csv(tmp_path, toy_embeddings):
    ranking = rank_targets(toy_embeddings, "s", ["t1", "t2", "t3"], k=2)
    path = tmp_path / "out" / "ranking.csv"
    write_ranking_csv(ranking, path, existing=["t2"])
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["target", "score", "existing"]
    assert frame["target"].tolist() == ["t1", "t2"]
    assert frame["existing"].tolist() == [0, 1]
    assert frame["score"].tolist() == pytest.approx(ranking.scores())


def test_predictions_csv(tmp_path, toy_embeddings):
    path = tmp_path / "pred.csv"
    write_predictions_csv(predict_topk(toy_embeddings, PAIRS, k=2), path)
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["source", "target", "score", "rank", "predicted_label"]
    assert frame["predicted_label"].tolist() == [1, 1, 0, 0]


def _random_embeddings(seed, n=40, dim=6):
    rng = np.random.default_rng(seed)
    uris = [f"n{i:02d}" for i in range(n)]
    return EmbeddingMatrix(uris, rng.normal(size=(n, dim)))


@pytest.mark.parametrize("seed", range(5))
def test_ranking_ignores_positive_rescaling(seed):
    model = _random_embeddings(seed)
    scales = np.random.default_rng(seed + 100).uniform(0.01, 100.0, size=(len(model), 1))
    rescaled = EmbeddingMatrix(model.uris, model.center * scales)
    candidates = model.uris[1:]

    before = rank_targets(model, "n00", candidates, k=len(candidates))
    after = rank_targets(rescaled, "n00", candidates, k=len(candidates))
    assert before.targets() == after.targets()
    np.testing.assert_allclose(before.scores(), after.scores(), atol=1e-12)
    for row in model.center[:5]:
        assert cosine(row, row) == pytest.approx(1.0)
        assert cosine(row, 3.5 * row) == pytest.approx(1.0)


def test_topk_positives_grow_with_k():
    model = _random_embeddings(11)
    rng = np.random.default_rng(12)
    pairs = [
        (source, target, int(rng.integers(0, 2)))
        for source in ("n00", "n01", "n02")
        for target in model.uris[10:30]
    ]

    previous_positives, previous_recall = set(), 0.0
    for k in range(1, 21):
        result = predict_topk(model, pairs, k)
        positives = {(p.source, p.target) for p in result.predictions if p.predicted_label}
        assert previous_positives <= positives
        assert len(positives) == 3 * k

        hits = sum(1 for p in result.predictions if p.predicted_label and p.label)
        actual = sum(p.label for p in result.predictions)
        recall = hits / actual
        assert recall >= previous_recall
        previous_positives, previous_recall = positives, recall
    assert previous_recall == 1.0
