"""
Evaluation of link predictors: confusion counts, metrics and comparison reports.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from src.baseline import LogRegModel, build_features, predict_logreg
from src.config import config
from src.embedding.model import EmbeddingMatrix
from src.errors import DataError
from src.pairs import LabeledPairSet, load_labeled_pairs, save_labeled_pairs
from src.ranking import predict_topk

logger = logging.getLogger(__name__)

Key = Tuple[str, str]

METRIC_COLUMNS = ["accuracy", "f1", "precision", "recall"]
REPORT_COLUMNS = ["test_set", "strategy", "method"] + METRIC_COLUMNS + ["tp", "fp", "tn", "fn", "skipped"]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    skipped: int = 0

    @property
    def evaluated(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def total(self) -> int:
        return self.evaluated + self.skipped


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    precision_undefined: bool = False
    recall_undefined: bool = False

    def as_dict(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_COLUMNS}


def confusion(
    predictions: Mapping[Key, int],
    labels: Mapping[Key, int],
    skipped: int = 0,
) -> ConfusionCounts:
    """
    Tally predictions against true labels.

    Raises:
        DataError: the two mappings do not cover the same pairs
    """
    if predictions.keys() != labels.keys():
        missing = sorted(set(labels) ^ set(predictions))[:3]
        raise DataError(f"predictions and labels do not match on pairs such as {missing}")
    tp = fp = tn = fn = 0
    for key, predicted in predictions.items():
        actual = labels[key]
        if predicted and actual:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, tn, fn, skipped)


def metrics(counts: ConfusionCounts) -> Metrics:
    """
    Accuracy, precision, recall and F1 over evaluated pairs.

    Undefined precision or recall is reported as 0 and flagged.

    Raises:
        DataError: nothing was evaluated
    """
    total = counts.evaluated
    if total == 0:
        raise DataError("no evaluated pairs: confusion counts are all zero")
    accuracy = (counts.tp + counts.tn) / total
    predicted_pos = counts.tp + counts.fp
    actual_pos = counts.tp + counts.fn
    precision = counts.tp / predicted_pos if predicted_pos else 0.0
    recall = counts.tp / actual_pos if actual_pos else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return Metrics(accuracy, precision, recall, f1, predicted_pos == 0, actual_pos == 0)


@dataclass(frozen=True)
class ReportRow:
    test_set: str
    strategy: str
    method: str
    counts: ConfusionCounts
    metrics: Metrics


@dataclass
class ComparisonReport:
    """Rows of (test set, strategy, method) metrics."""
    rows: List[ReportRow] = field(default_factory=list)

    def extend(self, other: "ComparisonReport") -> None:
        self.rows.extend(other.rows)

    def to_frame(self) -> pd.DataFrame:
        records = []
        for row in self.rows:
            record = {"test_set": row.test_set, "strategy": row.strategy, "method": row.method}
            record.update({name: f"{value:.4f}" for name, value in row.metrics.as_dict().items()})
            c = row.counts
            record.update({"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn, "skipped": c.skipped})
            records.append(record)
        return pd.DataFrame(records, columns=REPORT_COLUMNS)

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")

    def render_table(self) -> str:
        """Aligned plain-text table, metrics at 4 decimals."""
        frame = self.to_frame()
        if frame.empty:
            return "(empty report)\n"
        return frame.to_string(index=False) + "\n"

    def write(self, csv_path: Union[str, Path], table_path: Optional[Union[str, Path]] = None) -> None:
        csv_path = Path(csv_path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(self.to_csv(), encoding="utf-8")
        if table_path is not None:
            Path(table_path).write_text(self.render_table(), encoding="utf-8")


class Evaluator:
    """Evaluates top-K ranking and the logistic baseline on labeled pair sets."""

    def __init__(self, k_values: Optional[Sequence[int]] = None, feature_mode: Optional[str] = None):
        self.eval_config = config.get_evaluation_config()
        self.k_values = list(self.eval_config.k_values if k_values is None else k_values)
        self.feature_mode = feature_mode or config.get_baseline_config().feature_mode

    def evaluate_topk(
        self,
        model: EmbeddingMatrix,
        pairs: LabeledPairSet,
        k: Union[int, Mapping[str, int]],
    ) -> Tuple[ConfusionCounts, Metrics]:
        """
        Confusion counts and metrics of top-K prediction.

        Raises:
            DataError: no pair has both nodes in the vocabulary
        """
        result = predict_topk(model, pairs, k)
        if not result.predictions:
            raise DataError("no evaluable pairs")
        predicted, truth = result.as_labels()
        counts = confusion(predicted, truth, skipped=result.skipped)
        return counts, metrics(counts)

    def evaluate_baseline(
        self,
        model: EmbeddingMatrix,
        baseline: LogRegModel,
        pairs: LabeledPairSet,
    ) -> Tuple[ConfusionCounts, Metrics]:
        """
        Confusion counts and metrics of the logistic baseline.

        Raises:
            DataError: no pair has both nodes in the vocabulary
        """
        features = build_features(model, pairs, baseline.mode)
        if len(features) == 0:
            raise DataError("no evaluable pairs")
        _, labels = predict_logreg(baseline, features.matrix)
        predicted = dict(zip(features.keys, labels.tolist()))
        truth = dict(zip(features.keys, features.labels.astype(int).tolist()))
        counts = confusion(predicted, truth, skipped=len(features.excluded))
        return counts, metrics(counts)

    def compare_report(
        self,
        model: EmbeddingMatrix,
        pairs: LabeledPairSet,
        k_values: Optional[Sequence[int]] = None,
        baseline: Optional[LogRegModel] = None,
        strategy: str = "",
        test_set: Optional[str] = None,
    ) -> ComparisonReport:
        """
        One row for the baseline, then one per K.

        Args:
            model: Embeddings shared by both methods
            pairs: Labeled test pairs
            k_values: K list; the evaluator's configured list when None
            baseline: Fitted logistic model; its row is omitted when None
            strategy: Embedding strategy name for the report
            test_set: Test-set label; the pair set's provenance when None

        Returns:
            The comparison report
        """
        k_values = self.k_values if k_values is None else list(k_values)
        test_set = pairs.provenance if test_set is None else test_set
        report = ComparisonReport()
        if baseline is not None:
            counts, m = self.evaluate_baseline(model, baseline, pairs)
            report.rows.append(ReportRow(test_set, strategy, "logreg", counts, m))
        for k in k_values:
            counts, m = self.evaluate_topk(model, pairs, k)
            report.rows.append(ReportRow(test_set, strategy, f"topK@{k}", counts, m))
        for row in report.rows:
            logger.info(
                "evaluated test_set=%s strategy=%s method=%s accuracy=%.4f f1=%.4f skipped=%d",
                row.test_set, row.strategy, row.method, row.metrics.accuracy, row.metrics.f1,
                row.counts.skipped,
            )
        return report


__all__ = [
    "ComparisonReport",
    "ConfusionCounts",
    "Evaluator",
    "LabeledPairSet",
    "Metrics",
    "ReportRow",
    "confusion",
    "load_labeled_pairs",
    "metrics",
    "save_labeled_pairs",
]
