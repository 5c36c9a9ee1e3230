"""
Tests for vocabulary building and the negative-sampling noise table.
"""

import numpy as np
import pytest

from src.embedding.vocab import build_noise_table, build_vocab, noise_from_counts
from src.errors import DataError
from src.walkers.corpus import WalkCorpus


def _corpus(walks):
    return WalkCorpus([np.asarray(w, dtype=np.int64) for w in walks], "uniform", 0, "")


def test_vocab_counts_and_min_count():
    corpus = _corpus([[0, 1, 0, 2], [2, 0, 5]])
    vocab = build_vocab(corpus)
    assert vocab.counts_by_node() == {0: 3, 1: 1, 2: 2, 5: 1}
    assert vocab.total_tokens == 7

    trimmed = build_vocab(corpus, min_count=2)
    assert trimmed.node_ids.tolist() == [0, 2]
    assert trimmed.retained_tokens == 5
    np.testing.assert_array_equal(trimmed.encode(np.array([0, 1, 2, 5, 9])), [0, 1])


def test_vocab_errors():
    with pytest.raises(DataError):
        build_vocab(_corpus([]))
    with pytest.raises(DataError, match="min_count"):
        build_vocab(_corpus([[0, 1]]), min_count=5)


def test_noise_distribution_follows_power():
    vocab = build_vocab(_corpus([[0] * 16 + [1]]))
    noise = build_noise_table(vocab, power=0.75)
    expected = np.array([16 ** 0.75, 1.0])
    np.testing.assert_allclose(noise.probabilities(), expected / expected.sum())


def test_noise_sampling_frequencies():
    noise = noise_from_counts([1, 4, 9], power=0.5)
    draws = noise.sample(np.random.default_rng(0), 60000)
    freq = np.bincount(draws, minlength=3) / len(draws)
    np.testing.assert_allclose(freq, [1 / 6, 2 / 6, 3 / 6], atol=0.01)


def test_noise_without_mass():
    with pytest.raises(DataError):
        noise_from_counts([0, 0])


def test_noise_sampling_matches_distribution_at_scale():
    counts = np.arange(1, 11) ** 2
    noise = noise_from_counts(counts, power=0.75)
    draws = noise.sample(np.random.default_rng(3), 1_000_000)
    freq = np.bincount(draws, minlength=10) / len(draws)
    expected = counts ** 0.75 / np.sum(counts ** 0.75)
    np.testing.assert_allclose(noise.probabilities(), expected)
    np.testing.assert_allclose(freq, expected, atol=0.005)
