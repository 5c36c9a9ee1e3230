"""
Logistic-regression link prediction over embedding pair features.

The model is fitted by full-batch gradient descent on the mean logistic
loss plus (l2/2)*||w||^2; the bias is not penalized. A step that would
increase the objective is retried at half the learning rate.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import BaselineConfig
from src.embedding.model import EmbeddingMatrix
from src.errors import ConfigError, DataError, ModelError
from src.graph.store import HeteroGraph
from src.pairs import LabeledPairSet

logger = logging.getLogger(__name__)

FEATURE_MODES = ("hadamard", "concat")
MODEL_HEADER = "kgcomplete-logreg"
MODEL_VERSION = 1
MAX_STEP_HALVINGS = 50
REJECTION_FACTOR = 1000


def pair_features(model: EmbeddingMatrix, source: str, target: str, mode: str = "hadamard") -> np.ndarray:
    """
    Feature vector of one node pair.

    Raises:
        DataError: a node is not in the embedding vocabulary
        ConfigError: unknown mode
    """
    a = model.vector(source)
    b = model.vector(target)
    if mode == "hadamard":
        return a * b
    if mode == "concat":
        return np.concatenate([a, b])
    raise ConfigError(f"unknown feature mode: {mode}")


@dataclass
class PairFeatures:
    """Feature rows for the pairs that could be featurized."""
    matrix: np.ndarray
    labels: np.ndarray
    keys: List[Tuple[str, str]]
    mode: str
    excluded: List[Tuple[str, str, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.keys)


def build_features(model: EmbeddingMatrix, pairs: LabeledPairSet, mode: str = "hadamard") -> PairFeatures:
    """Featurize every pair whose nodes are both embedded; the rest are excluded."""
    if mode not in FEATURE_MODES:
        raise ConfigError(f"unknown feature mode: {mode}")
    width = model.dim * (2 if mode == "concat" else 1)
    rows: List[np.ndarray] = []
    labels: List[int] = []
    keys: List[Tuple[str, str]] = []
    excluded: List[Tuple[str, str, int]] = []
    for source, target, label in pairs:
        if source in model and target in model:
            rows.append(pair_features(model, source, target, mode))
            labels.append(label)
            keys.append((source, target))
        else:
            excluded.append((source, target, label))
    matrix = np.vstack(rows) if rows else np.empty((0, width))
    return PairFeatures(matrix, np.asarray(labels, dtype=np.float64), keys, mode, excluded)


def linked_pairs(graph: HeteroGraph, relations: Optional[Sequence[str]] = None) -> np.ndarray:
    """
    Distinct ``(u, v)`` node pairs joined by at least one edge of ``relations``.

    A pair linked by several predicates appears once, in the orientation of
    its first edge.
    """
    edges = graph.edge_list
    if relations:
        wanted = [graph.type_registry.edge_type_index(r) for r in relations]
        edges = edges[np.isin(edges[:, 2], wanted)]
    if len(edges) == 0:
        return np.empty((0, 2), dtype=np.int64)
    keys = np.stack([np.minimum(edges[:, 0], edges[:, 1]), np.maximum(edges[:, 0], edges[:, 1])], axis=1)
    _, first = np.unique(keys, axis=0, return_index=True)
    return edges[np.sort(first), :2].astype(np.int64)


def capped_link_counts(graph: HeteroGraph, config: BaselineConfig) -> BaselineConfig:
    """
    Shrink ``n_pos`` and ``n_neg`` to half the available linked pairs.

    Small graphs cannot supply the default thousand positives; the cap keeps
    the sampler from failing and leaves room for negatives.
    """
    available = len(linked_pairs(graph, config.relations)) // 2
    if config.n_pos <= available and config.n_neg <= available:
        return config
    links = max(1, available)
    logger.warning(
        "baseline n_pos=%d n_neg=%d exceed the %d linked pairs available; using %d of each "
        "(set baseline.n_pos / baseline.n_neg to silence)",
        config.n_pos, config.n_neg, available, links,
    )
    return config.model_copy(update={"n_pos": min(config.n_pos, links), "n_neg": min(config.n_neg, links)})


def sample_training_links(
    graph: HeteroGraph,
    relations: Optional[Sequence[str]],
    n_pos: int,
    n_neg: int,
    rng: np.random.Generator,
) -> LabeledPairSet:
    """
    Sample labeled links from the graph.

    Positives are distinct linked node pairs of the chosen relations. Negatives are node
    pairs whose (source type, target type) follows the type mix of those
    edges, verified not to be edges.

    Args:
        graph: Graph to sample from
        relations: Edge type names to draw positives from; all when None
        n_pos: Number of positive links
        n_neg: Number of negative links
        rng: Random generator

    Returns:
        Pair set of URIs with provenance ``sampled``

    Raises:
        DataError: fewer matching edges than ``n_pos``, or too many rejected
            negative draws ("graph too dense")
    """
    pairs = LabeledPairSet(provenance="sampled")
    if n_pos == 0 and n_neg == 0:
        return pairs

    edges = linked_pairs(graph, relations)
    if len(edges) < max(n_pos, 1):
        raise DataError(f"insufficient edges: {len(edges)} node pairs match the relation filter, need {max(n_pos, 1)}")

    chosen = rng.choice(len(edges), size=n_pos, replace=False)
    for u, v in edges[np.sort(chosen)]:
        pairs.add(graph.uri_of(int(u)), graph.uri_of(int(v)), 1)

    type_pairs = np.stack([graph.node_types[edges[:, 0]], graph.node_types[edges[:, 1]]], axis=1)
    combos, combo_counts = np.unique(type_pairs, axis=0, return_counts=True)
    combo_p = combo_counts / combo_counts.sum()
    members: Dict[int, np.ndarray] = {int(t): graph.nodes_by_type(int(t)) for t in np.unique(combos)}

    seen = {(min(int(u), int(v)), max(int(u), int(v))) for u, v in edges[chosen]}
    accepted = 0
    rejected = 0
    limit = REJECTION_FACTOR * n_neg
    while accepted < n_neg:
        src_type, dst_type = combos[rng.choice(len(combos), p=combo_p)]
        u = int(rng.choice(members[int(src_type)]))
        v = int(rng.choice(members[int(dst_type)]))
        key = (min(u, v), max(u, v))
        if u == v or key in seen or graph.has_edge(u, v):
            rejected += 1
            if rejected > limit:
                raise DataError(f"graph too dense: {rejected} negative draws rejected for {n_neg} negatives")
            continue
        seen.add(key)
        pairs.add(graph.uri_of(u), graph.uri_of(v), 0)
        accepted += 1

    logger.info("sampled links positives=%d negatives=%d rejected=%d", n_pos, n_neg, rejected)
    return pairs


def split_train_validation(
    pairs: LabeledPairSet,
    validation_fraction: float,
    rng: np.random.Generator,
) -> Tuple[LabeledPairSet, LabeledPairSet]:
    """Shuffle and split into (train, validation)."""
    items = list(pairs)
    order = rng.permutation(len(items))
    n_val = int(round(validation_fraction * len(items)))
    val = LabeledPairSet((items[i] for i in order[:n_val]), provenance=f"{pairs.provenance}:validation")
    train = LabeledPairSet((items[i] for i in order[n_val:]), provenance=f"{pairs.provenance}:train")
    return train, val


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    mode: str = "hadamard"
    iterations: int = 0
    final_loss: float = float("nan")
    loss_trace: List[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.weights)


def logreg_loss(weights: np.ndarray, bias: float, x: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean logistic loss plus (l2/2)*||w||^2."""
    z = x @ weights + bias
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (weights @ weights))


def logreg_gradient(
    weights: np.ndarray, bias: float, x: np.ndarray, y: np.ndarray, l2: float
) -> Tuple[np.ndarray, float]:
    residual = _sigmoid(x @ weights + bias) - y
    return x.T @ residual / len(y) + l2 * weights, float(residual.mean())


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


def fit_logreg(
    x: np.ndarray,
    y: np.ndarray,
    l2: float = 1e-4,
    learning_rate: float = 0.1,
    max_epochs: int = 200,
    tolerance: float = 1e-6,
    mode: str = "hadamard",
) -> LogRegModel:
    """
    Fit a logistic-regression model from zero weights.

    Args:
        x: Feature matrix (n, d)
        y: 0/1 labels (n,)
        l2: Weight penalty
        learning_rate: Initial step size
        max_epochs: Maximum number of full-batch steps
        tolerance: Stop when the objective improves by less than this
        mode: Feature map the features came from; stored with the model

    Returns:
        Fitted model with its objective trace (index 0 is the initial objective)

    Raises:
        ModelError: empty input, shape mismatch, or only one class present
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or len(x) == 0 or len(x) != len(y):
        raise ModelError(f"bad training data shapes: features {x.shape}, labels {y.shape}")
    if len(np.unique(y)) < 2:
        raise ModelError("logistic regression needs both positive and negative examples")

    w = np.zeros(x.shape[1])
    b = 0.0
    loss = logreg_loss(w, b, x, y, l2)
    trace = [loss]
    lr = learning_rate
    epoch = 0
    for epoch in range(1, max_epochs + 1):
        grad_w, grad_b = logreg_gradient(w, b, x, y, l2)
        for _ in range(MAX_STEP_HALVINGS):
            new_w, new_b = w - lr * grad_w, b - lr * grad_b
            new_loss = logreg_loss(new_w, new_b, x, y, l2)
            if new_loss <= loss:
                break
            lr *= 0.5
        else:
            logger.debug("logreg step halving exhausted at epoch %d", epoch)
            break
        improvement = loss - new_loss
        w, b, loss = new_w, new_b, new_loss
        trace.append(loss)
        if improvement < tolerance:
            break

    if not (np.all(np.isfinite(w)) and np.isfinite(b)):
        raise ModelError("logistic regression diverged")
    logger.info("logreg fitted epochs=%d loss=%.6f lr=%.4g", epoch, loss, lr)
    return LogRegModel(w, float(b), mode, epoch, loss, trace)


def predict_logreg(model: LogRegModel, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Probabilities and hard labels; label is 1 exactly when w.x + b >= 0.

    Raises:
        ModelError: feature dimension mismatch
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.dim:
        raise ModelError(f"feature dimension {x.shape[1]} != model dimension {model.dim}")
    margin = x @ model.weights + model.bias
    return _sigmoid(margin), (margin >= 0).astype(np.int64)


def train_baseline(
    graph: HeteroGraph,
    embeddings: EmbeddingMatrix,
    config: BaselineConfig,
) -> Tuple[LogRegModel, Dict[str, float]]:
    """
    Sample links from the graph, split off a validation set, fit and score on validation.

    Returns:
        (model, validation summary with accuracy and pair counts)
    """
    rng = np.random.default_rng(config.seed)
    links = sample_training_links(graph, config.relations, config.n_pos, config.n_neg, rng)
    return fit_baseline(embeddings, links, config, rng)


def fit_baseline(
    embeddings: EmbeddingMatrix,
    links: LabeledPairSet,
    config: BaselineConfig,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[LogRegModel, Dict[str, float]]:
    """
    Fit the baseline on already labeled links, holding out ``validation_fraction`` of them.

    Returns:
        (model, validation summary with accuracy and pair counts)
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    train_pairs, val_pairs = split_train_validation(links, config.validation_fraction, rng)
    features = build_features(embeddings, train_pairs, config.feature_mode)
    if features.excluded:
        logger.warning("baseline training skipped %d pairs outside the embedding vocabulary", len(features.excluded))
    model = fit_logreg(
        features.matrix,
        features.labels,
        l2=config.l2,
        learning_rate=config.learning_rate,
        max_epochs=config.max_epochs,
        tolerance=config.tolerance,
        mode=config.feature_mode,
    )
    summary = {"train_pairs": float(len(features)), "validation_pairs": 0.0}
    val = build_features(embeddings, val_pairs, config.feature_mode)
    if len(val):
        _, labels = predict_logreg(model, val.matrix)
        summary["validation_pairs"] = float(len(val))
        summary["validation_accuracy"] = float(np.mean(labels == val.labels))
        logger.info("baseline validation accuracy=%.4f pairs=%d", summary["validation_accuracy"], len(val))
    return model, summary


def save_logreg(model: LogRegModel, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{MODEL_HEADER} {MODEL_VERSION}\n")
        f.write(f"mode {model.mode}\n")
        f.write(f"dim {model.dim}\n")
        f.write(f"bias {model.bias:.17g}\n")
        for w in model.weights:
            f.write(f"{w:.17g}\n")


def load_logreg(path: Union[str, Path]) -> LogRegModel:
    """
    Read a model written by :func:`save_logreg`.

    Raises:
        DataError: wrong header or version, or weight count != dim
    """
    with open(path, "r", encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]
    try:
        header, version = lines[0].split()
        if header != MODEL_HEADER:
            raise DataError(f"{path}: not a logistic-regression model file", 1)
        if int(version) != MODEL_VERSION:
            raise DataError(f"{path}: model format version {version}, expected {MODEL_VERSION}", 1)
        mode = lines[1].split()[1]
        dim = int(lines[2].split()[1])
        bias = float(lines[3].split()[1])
        weights = np.array([float(v) for v in lines[4:]])
    except DataError:
        raise
    except (IndexError, ValueError) as e:
        raise DataError(f"{path}: malformed model file: {e}") from e
    if len(weights) != dim:
        raise DataError(f"{path}: {len(weights)} weights for dim {dim}")
    return LogRegModel(weights, bias, mode)
