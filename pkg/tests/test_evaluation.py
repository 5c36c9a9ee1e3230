"""
Tests for confusion counts, metrics and comparison reports.
"""

import numpy as np
import pytest

from src.baseline import LogRegModel
from src.errors import DataError
from src.evaluation import ComparisonReport, ConfusionCounts, Evaluator, confusion, metrics
from src.pairs import LabeledPairSet


@pytest.fixture
def pairs():
    return LabeledPairSet(
        [("s", "t1", 1), ("s", "t3", 0), ("s", "t2", 1), ("s", "t4", 0), ("s", "ghost", 1)],
        provenance="unit",
    )


@pytest.fixture
def baseline():
    return LogRegModel(np.array([1.0, 0.0]), -0.5, "hadamard")


def test_confusion_and_metrics():
    predicted = {("s", "a"): 1, ("s", "b"): 1, ("s", "c"): 0, ("s", "d"): 0}
    truth = {("s", "a"): 1, ("s", "b"): 0, ("s", "c"): 1, ("s", "d"): 0}
    counts = confusion(predicted, truth, skipped=2)
    assert counts == ConfusionCounts(tp=1, fp=1, tn=1, fn=1, skipped=2)
    assert counts.total == 6
    m = metrics(counts)
    assert (m.accuracy, m.precision, m.recall, m.f1) == (0.5, 0.5, 0.5, 0.5)


def test_undefined_precision_is_flagged():
    m = metrics(ConfusionCounts(tp=0, fp=0, tn=3, fn=1))
    assert m.precision == 0.0
    assert m.precision_undefined
    assert not m.recall_undefined
    assert m.f1 == 0.0
    assert m.accuracy == 0.75


def test_metrics_errors():
    with pytest.raises(DataError):
        metrics(ConfusionCounts())
    with pytest.raises(DataError):
        confusion({("a", "b"): 1}, {("a", "c"): 1})


def test_evaluate_topk(toy_embeddings, pairs):
    evaluator = Evaluator(k_values=[1, 2])
    counts, m = evaluator.evaluate_topk(toy_embeddings, pairs, 1)
    assert counts == ConfusionCounts(tp=1, fp=0, tn=2, fn=1, skipped=1)
    assert m.accuracy == 0.75
    assert m.recall == 0.5
    assert m.f1 == pytest.approx(2 / 3)


def test_evaluate_baseline(toy_embeddings, pairs, baseline):
    counts, m = Evaluator().evaluate_baseline(toy_embeddings, baseline, pairs)
    assert counts == ConfusionCounts(tp=2, fp=0, tn=2, fn=0, skipped=1)
    assert m.accuracy == 1.0


def test_no_evaluable_pairs(toy_embeddings, baseline):
    ghosts = LabeledPairSet([("ghost", "t1", 1), ("s", "phantom", 0)])
    evaluator = Evaluator(k_values=[1])
    with pytest.raises(DataError, match="no evaluable pairs"):
        evaluator.evaluate_topk(toy_embeddings, ghosts, 1)
    with pytest.raises(DataError, match="no evaluable pairs"):
        evaluator.evaluate_baseline(toy_embeddings, baseline, ghosts)


def test_compare_report(toy_embeddings, pairs, baseline):
    report = Evaluator().compare_report(toy_embeddings, pairs, [1, 2], baseline, strategy="node2vec")
    assert [row.method for row in report.rows] == ["logreg", "topK@1", "topK@2"]
    assert {row.test_set for row in report.rows} == {"unit"}

    lines = report.to_csv().splitlines()
    assert lines[0] == "test_set,strategy,method,accuracy,f1,precision,recall,tp,fp,tn,fn,skipped"
    assert lines[1] == "unit,node2vec,logreg,1.0000,1.0000,1.0000,1.0000,2,0,2,0,1"
    assert lines[2] == "unit,node2vec,topK@1,0.7500,0.6667,1.0000,0.5000,1,0,2,1,1"
    assert "topK@2" in report.render_table()


def test_report_files_are_stable(tmp_path, toy_embeddings, pairs, baseline):
    evaluator = Evaluator()
    first = evaluator.compare_report(toy_embeddings, pairs, [2], baseline, strategy="uniform")
    second = evaluator.compare_report(toy_embeddings, pairs, [2], baseline, strategy="uniform")
    first.write(tmp_path / "a.csv", tmp_path / "a.txt")
    second.write(tmp_path / "b.csv", tmp_path / "b.txt")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.txt").read_text(encoding="utf-8") == first.render_table()


def test_empty_report_table():
    assert ComparisonReport().render_table() == "(empty report)\n"


def test_metrics_match_brute_force_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(1, 40))
        predicted = rng.integers(0, 2, size=n)
        actual = rng.integers(0, 2, size=n)
        keys = [("s", f"t{i}") for i in range(n)]
        counts = confusion(
            {key: int(p) for key, p in zip(keys, predicted)},
            {key: int(a) for key, a in zip(keys, actual)},
        )

        tp = int(np.sum((predicted == 1) & (actual == 1)))
        fp = int(np.sum((predicted == 1) & (actual == 0)))
        tn = int(np.sum((predicted == 0) & (actual == 0)))
        fn = int(np.sum((predicted == 0) & (actual == 1)))
        assert (counts.tp, counts.fp, counts.tn, counts.fn) == (tp, fp, tn, fn)

        result = metrics(counts)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        assert result.accuracy == pytest.approx(float(np.mean(predicted == actual)), abs=1e-12)
        assert result.precision == pytest.approx(precision, abs=1e-12)
        assert result.recall == pytest.approx(recall, abs=1e-12)
        assert result.f1 == pytest.approx(f1, abs=1e-12)
        assert result.precision_undefined == (tp + fp == 0)
