"""
Vocabulary and negative-sampling noise distribution.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from src.errors import DataError
from src.walkers.corpus import WalkCorpus


@dataclass
class Vocabulary:
    """Dense vocab index <-> node index mapping with token counts."""
    node_ids: np.ndarray
    counts: np.ndarray
    total_tokens: int
    _lookup: Dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.node_ids = np.asarray(self.node_ids, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self._lookup = {int(n): i for i, n in enumerate(self.node_ids)}
        size = int(self.node_ids.max()) + 1 if len(self.node_ids) else 0
        self._lut = np.full(size, -1, dtype=np.int64)
        self._lut[self.node_ids] = np.arange(len(self.node_ids))

    def __len__(self) -> int:
        return len(self.node_ids)

    @property
    def retained_tokens(self) -> int:
        return int(self.counts.sum())

    def vocab_index(self, node: int) -> Optional[int]:
        return self._lookup.get(int(node))

    def encode(self, walk: np.ndarray) -> np.ndarray:
        """Map a walk to vocab indices, dropping nodes outside the vocabulary."""
        walk = np.asarray(walk, dtype=np.int64)
        inside = walk < len(self._lut)
        encoded = np.full(len(walk), -1, dtype=np.int64)
        encoded[inside] = self._lut[walk[inside]]
        return encoded[encoded >= 0]

    def counts_by_node(self) -> Dict[int, int]:
        return {int(n): int(c) for n, c in zip(self.node_ids, self.counts)}


def build_vocab(corpus: WalkCorpus, min_count: int = 1) -> Vocabulary:
    """
    Count node occurrences and keep nodes seen at least ``min_count`` times.

    Raises:
        DataError: empty corpus, or every node dropped
    """
    walks = [w for w in corpus.walks if len(w)]
    if not walks:
        raise DataError("cannot build a vocabulary from an empty corpus")
    tokens = np.concatenate(walks).astype(np.int64)
    counts = np.bincount(tokens)
    node_ids = np.flatnonzero(counts >= max(min_count, 1))
    if len(node_ids) == 0:
        raise DataError(f"every node occurs fewer than min_count={min_count} times")
    return Vocabulary(node_ids=node_ids, counts=counts[node_ids], total_tokens=len(tokens))


class NoiseTable:
    """Cumulative noise distribution P(w) proportional to count(w)**power."""

    def __init__(self, cumulative: np.ndarray):
        self.cumulative = np.asarray(cumulative, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.cumulative)

    def probabilities(self) -> np.ndarray:
        return np.diff(self.cumulative, prepend=0.0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = np.searchsorted(self.cumulative, rng.random(size), side="right")
        return np.minimum(idx, len(self.cumulative) - 1)


def noise_from_counts(counts: Sequence[float], power: float = 0.75) -> NoiseTable:
    weights = np.power(np.asarray(counts, dtype=np.float64), power)
    total = weights.sum()
    if not total > 0:
        raise DataError("noise distribution has no mass")
    cumulative = np.cumsum(weights) / total
    cumulative[-1] = 1.0
    return NoiseTable(cumulative)


def build_noise_table(vocab: Vocabulary, power: float = 0.75) -> NoiseTable:
    """
    Build the negative-sampling table for ``vocab``.

    Raises:
        DataError: empty vocabulary
    """
    if len(vocab) == 0:
        raise DataError("cannot build a noise table for an empty vocabulary")
    return noise_from_counts(vocab.counts, power)
