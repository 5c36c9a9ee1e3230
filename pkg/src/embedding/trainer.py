"""
Skip-gram with negative sampling, trained by SGD over a walk corpus.

Per (center c, context o) pair with negatives j the loss is
    -log s(u_o . v_c) - sum_j log s(-u_j . v_c)
with s the logistic function; scores are clamped to [-30, 30].
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.config import TrainConfig
from src.embedding.model import EmbeddingMatrix
from src.embedding.vocab import NoiseTable, Vocabulary, build_noise_table, build_vocab, noise_from_counts
from src.errors import ModelError
from src.walkers.corpus import WalkCorpus

logger = logging.getLogger(__name__)

SCORE_CLAMP = 30.0
MAX_NEGATIVE_REDRAWS = 100


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _log_sigmoid(x):
    return -np.log1p(np.exp(-x))


def negative_sampling_loss(
    center_vec: np.ndarray,
    context_vec: np.ndarray,
    negative_vecs: np.ndarray,
) -> float:
    """Loss of one (center, context, negatives) tuple without updating anything."""
    s_pos = np.clip(context_vec @ center_vec, -SCORE_CLAMP, SCORE_CLAMP)
    s_neg = np.clip(np.reshape(negative_vecs, (-1, len(center_vec))) @ center_vec,
                    -SCORE_CLAMP, SCORE_CLAMP)
    return float(-(_log_sigmoid(s_pos) + _log_sigmoid(-s_neg).sum()))


def negative_sampling_gradients(
    center_vec: np.ndarray,
    context_vec: np.ndarray,
    negative_vecs: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Analytic gradients of :func:`negative_sampling_loss`.

    Returns:
        (d/d v_c, d/d u_o, d/d u_j stacked row-wise)
    """
    negative_vecs = np.reshape(negative_vecs, (-1, len(center_vec)))
    g_pos = _sigmoid(np.clip(context_vec @ center_vec, -SCORE_CLAMP, SCORE_CLAMP)) - 1.0
    g_neg = _sigmoid(np.clip(negative_vecs @ center_vec, -SCORE_CLAMP, SCORE_CLAMP))
    grad_center = g_pos * context_vec + g_neg @ negative_vecs
    return grad_center, g_pos * center_vec, np.outer(g_neg, center_vec)


def sgd_step(
    center: int,
    context: int,
    negatives: Sequence[int],
    lr: float,
    model: EmbeddingMatrix,
) -> float:
    """
    One SGD update for a positive pair and its negatives.

    Context rows are updated with the pre-update center vector; the center
    row is updated once with the gradient accumulated from pre-update
    context rows.

    Returns:
        The loss before the update

    Raises:
        ModelError: non-finite input vectors, or a model without context vectors
    """
    if model.context is None:
        raise ModelError("model has no context vectors")
    rows = np.empty(len(negatives) + 1, dtype=np.int64)
    rows[0] = context
    rows[1:] = negatives
    v = model.center[center]
    u = model.context[rows]
    if not (np.isfinite(v).all() and np.isfinite(u).all()):
        raise ModelError(f"non-finite vectors at center row {center}")

    scores = np.clip(u @ v, -SCORE_CLAMP, SCORE_CLAMP)
    g = _sigmoid(scores)
    g[0] -= 1.0
    loss = -(_log_sigmoid(scores[0]) + _log_sigmoid(-scores[1:]).sum())

    np.subtract.at(model.context, rows, lr * np.outer(g, v))
    model.center[center] -= lr * (g @ u)
    return float(loss)


def draw_negatives(
    noise: NoiseTable,
    rng: np.random.Generator,
    k: int,
    exclude: int,
) -> Tuple[np.ndarray, int]:
    """
    Draw ``k`` negatives, re-drawing any equal to ``exclude``.

    Returns:
        (negatives, number skipped after MAX_NEGATIVE_REDRAWS failed re-draws)
    """
    negatives = noise.sample(rng, k)
    clashes = np.flatnonzero(negatives == exclude)
    if len(clashes) == 0:
        return negatives, 0
    keep = np.ones(k, dtype=bool)
    for i in clashes:
        for _ in range(MAX_NEGATIVE_REDRAWS):
            candidate = int(noise.sample(rng, 1)[0])
            if candidate != exclude:
                negatives[i] = candidate
                break
        else:
            keep[i] = False
    return negatives[keep], int((~keep).sum())


def window_pair_count(length: int, window: int) -> int:
    """Number of (center, context) pairs in a walk of ``length`` tokens."""
    return sum(min(window, t) + min(window, length - 1 - t) for t in range(length))


def initialize_model(
    vocab: Vocabulary,
    dim: int,
    rng: np.random.Generator,
    node_uris: Optional[Sequence[str]] = None,
) -> EmbeddingMatrix:
    """Center vectors uniform in [-0.5/d, 0.5/d], context vectors zero."""
    if node_uris is None:
        uris = [str(int(n)) for n in vocab.node_ids]
    else:
        uris = [node_uris[int(n)] for n in vocab.node_ids]
    center = rng.uniform(-0.5 / dim, 0.5 / dim, size=(len(vocab), dim))
    return EmbeddingMatrix(uris, center, np.zeros((len(vocab), dim)))


@dataclass
class TrainResult:
    model: EmbeddingMatrix
    vocab: Vocabulary
    loss_trace: List[float] = field(default_factory=list)
    pairs_trained: int = 0
    negatives_skipped: int = 0


class SkipGramTrainer:
    """Runs SGD epochs over encoded walks."""

    def __init__(self, config: TrainConfig, show_progress: bool = False):
        self.config = config
        self.show_progress = show_progress

    def _run_shard(
        self,
        model: EmbeddingMatrix,
        walks: Sequence[np.ndarray],
        noise: NoiseTable,
        rng: np.random.Generator,
        start_pair: int,
        total_pairs: int,
    ) -> Tuple[float, int, int]:
        cfg = self.config
        lr0 = cfg.learning_rate
        floor = lr0 * cfg.min_lr_fraction
        processed = start_pair
        loss_sum = 0.0
        skipped = 0
        for walk in walks:
            n = len(walk)
            for t in range(n):
                center = int(walk[t])
                for j in range(max(0, t - cfg.window), min(n, t + cfg.window + 1)):
                    if j == t:
                        continue
                    context = int(walk[j])
                    lr = max(floor, lr0 * (1.0 - processed / total_pairs))
                    negatives, n_skipped = draw_negatives(noise, rng, cfg.negatives, context)
                    skipped += n_skipped
                    loss_sum += sgd_step(center, context, negatives, lr, model)
                    processed += 1
        return loss_sum, processed - start_pair, skipped

    def fit(
        self,
        model: EmbeddingMatrix,
        walks: List[np.ndarray],
        noise: NoiseTable,
        rng: np.random.Generator,
    ) -> Tuple[List[float], int, int]:
        cfg = self.config
        pairs_per_epoch = sum(window_pair_count(len(w), cfg.window) for w in walks)
        total_pairs = max(1, pairs_per_epoch * cfg.epochs)
        workers = cfg.workers
        if cfg.deterministic and workers > 1:
            logger.warning("deterministic training uses one worker (workers=%d ignored)", workers)
            workers = 1

        trace: List[float] = []
        trained = 0
        skipped = 0
        shard_rngs = [rng]
        if workers > 1:
            root = np.random.SeedSequence(int(rng.integers(2**63)))
            shard_rngs = [np.random.default_rng(s) for s in root.spawn(workers)]
        shards = [walks[i::workers] for i in range(workers)]
        for epoch in tqdm(range(cfg.epochs), desc="epochs", disable=not self.show_progress):
            if workers == 1:
                results = [self._run_shard(model, walks, noise, rng, trained, total_pairs)]
            else:
                # Shards update shared rows without locking.
                shard_pairs = [sum(window_pair_count(len(w), cfg.window) for w in s) for s in shards]
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    futures = [
                        pool.submit(
                            self._run_shard, model, shard, noise, shard_rngs[i],
                            epoch * shard_pairs[i], max(1, shard_pairs[i] * cfg.epochs),
                        )
                        for i, shard in enumerate(shards)
                    ]
                    results = [f.result() for f in futures]
            epoch_loss = sum(r[0] for r in results)
            epoch_pairs = sum(r[1] for r in results)
            trained += epoch_pairs
            skipped += sum(r[2] for r in results)
            trace.append(epoch_loss / epoch_pairs if epoch_pairs else float("nan"))
            logger.info("epoch=%d mean_loss=%.6f pairs=%d", epoch + 1, trace[-1], epoch_pairs)
        return trace, trained, skipped


def train(
    corpus: WalkCorpus,
    config: TrainConfig,
    node_uris: Optional[Sequence[str]] = None,
    seed: Optional[int] = None,
    show_progress: bool = False,
) -> TrainResult:
    """
    Learn node embeddings from a walk corpus.

    Args:
        corpus: Walk corpus
        config: Training hyperparameters
        node_uris: URIs for the corpus' node indices; indices as strings if omitted
        seed: RNG seed; defaults to ``config.seed``
        show_progress: Draw a tqdm bar over epochs

    Returns:
        Model, vocabulary, per-epoch mean loss trace and counters
    """
    rng = np.random.default_rng(config.seed if seed is None else seed)
    vocab = build_vocab(corpus, config.min_count)
    noise = build_noise_table(vocab, config.noise_power)
    model = initialize_model(vocab, config.dim, rng, node_uris)
    walks = [vocab.encode(w) for w in corpus.walks]

    trace, trained, skipped = SkipGramTrainer(config, show_progress).fit(model, walks, noise, rng)
    model.check_finite()
    logger.info(
        "training done vocab=%d dim=%d pairs=%d negatives_skipped=%d",
        len(vocab), config.dim, trained, skipped,
    )
    return TrainResult(model, vocab, trace, trained, skipped)


def mean_loss(
    model: EmbeddingMatrix,
    corpus: WalkCorpus,
    config: TrainConfig,
    node_uris: Optional[Sequence[str]] = None,
    seed: Optional[int] = None,
    sample_size: Optional[int] = None,
) -> float:
    """
    Average loss over a fixed-seed sample of (center, context, negatives) tuples.

    Nothing is updated. Centers are chosen by walk, position and window offset;
    negatives come from the corpus noise distribution.

    Raises:
        ModelError: no context vectors, or no sample could be drawn
    """
    if model.context is None:
        raise ModelError("mean_loss needs context vectors")
    sample_size = config.loss_sample_size if sample_size is None else sample_size

    def row(node: int) -> int:
        uri = str(int(node)) if node_uris is None else node_uris[int(node)]
        r = model.row_of(uri)
        return -1 if r is None else r

    walks = []
    for w in corpus.walks:
        rows = np.array([row(n) for n in w], dtype=np.int64)
        rows = rows[rows >= 0]
        if len(rows) >= 2:
            walks.append(rows)
    if not walks or sample_size < 1:
        raise ModelError("empty loss sample")

    noise = noise_from_counts(np.bincount(np.concatenate(walks), minlength=len(model)), config.noise_power)
    rng = np.random.default_rng(config.seed if seed is None else seed)
    c = config.window
    total = 0.0
    for _ in range(sample_size):
        walk = walks[int(rng.integers(len(walks)))]
        n = len(walk)
        t = int(rng.integers(n))
        offsets = [j for j in range(max(0, t - c), min(n, t + c + 1)) if j != t]
        j = offsets[int(rng.integers(len(offsets)))]
        negatives, _ = draw_negatives(noise, rng, config.negatives, int(walk[j]))
        total += negative_sampling_loss(
            model.center[walk[t]], model.context[walk[j]], model.context[negatives]
        )
    value = total / sample_size
    if not math.isfinite(value):
        raise ModelError("mean loss is not finite")
    return value
