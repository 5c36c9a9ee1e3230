"""
Skip-gram node embeddings: vocabulary, noise table, trainer, persistence.
"""

from src.embedding.model import (
    EmbeddingMatrix,
    load_binary,
    load_embeddings,
    load_text,
    save_binary,
    save_text,
)
from src.embedding.trainer import (
    SkipGramTrainer,
    TrainResult,
    draw_negatives,
    initialize_model,
    mean_loss,
    negative_sampling_gradients,
    negative_sampling_loss,
    sgd_step,
    train,
    window_pair_count,
)
from src.embedding.vocab import NoiseTable, Vocabulary, build_noise_table, build_vocab

__all__ = [
    "EmbeddingMatrix",
    "NoiseTable",
    "SkipGramTrainer",
    "TrainResult",
    "Vocabulary",
    "build_noise_table",
    "build_vocab",
    "draw_negatives",
    "initialize_model",
    "load_binary",
    "load_embeddings",
    "load_text",
    "mean_loss",
    "negative_sampling_gradients",
    "negative_sampling_loss",
    "save_binary",
    "save_text",
    "sgd_step",
    "train",
    "window_pair_count",
]
