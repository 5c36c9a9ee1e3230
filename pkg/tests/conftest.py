"""
Shared fixtures: small graphs, a drug-gene star, toy embeddings.
"""

from typing import List

import numpy as np
import pytest

from src.config import TrainConfig, WalkConfig
from src.embedding.model import EmbeddingMatrix
from src.graph.store import HeteroGraph, ingest_triples
from tests.graphs import COMPOUND, EX, GENES, INTERACTS, gene_uri, graph_from_pairs, nt


@pytest.fixture
def path_graph() -> HeteroGraph:
    """a - b - c - d"""
    return graph_from_pairs([("a", "b"), ("b", "c"), ("c", "d")])


@pytest.fixture
def triangle_tail_graph() -> HeteroGraph:
    """Triangle a-b-c with a tail b-d; from b after a: a returns, c is shared, d is outward."""
    return graph_from_pairs([("a", "b"), ("a", "c"), ("b", "c"), ("b", "d")])


@pytest.fixture
def two_relation_graph() -> HeteroGraph:
    """Chain with alternating predicates: a -x- b -y- c -x- d -y- e."""
    x, y = "http://ex.org/rel/x", "http://ex.org/rel/y"
    return ingest_triples([
        nt(EX + "a", x, EX + "b"),
        nt(EX + "b", y, EX + "c"),
        nt(EX + "c", x, EX + "d"),
        nt(EX + "d", y, EX + "e"),
    ])


@pytest.fixture
def apicidin_lines() -> List[str]:
    return [nt(COMPOUND, INTERACTS, gene_uri(g)) for g in GENES]


@pytest.fixture
def apicidin_graph(apicidin_lines) -> HeteroGraph:
    return ingest_triples(apicidin_lines)


@pytest.fixture
def two_cliques_graph() -> HeteroGraph:
    """Two 5-cliques joined by one bridge edge l0-r0."""
    pairs = []
    for side in ("l", "r"):
        pairs += [(f"{side}{i}", f"{side}{j}") for i in range(5) for j in range(i + 1, 5)]
    pairs.append(("l0", "r0"))
    return graph_from_pairs(pairs)


@pytest.fixture
def small_walk_config() -> WalkConfig:
    return WalkConfig(walk_length=10, walks_per_node=5, seed=7)


@pytest.fixture
def small_train_config() -> TrainConfig:
    return TrainConfig(dim=8, window=2, negatives=3, epochs=2, learning_rate=0.05, seed=7, loss_sample_size=200)


@pytest.fixture
def toy_embeddings() -> EmbeddingMatrix:
    """2-d vectors: ``s`` along x, ``t1``..``t4`` at increasing angles from it."""
    uris = ["s", "t1", "t2", "t3", "t4"]
    center = np.array([
        [1.0, 0.0],
        [1.0, 0.1],
        [1.0, 1.0],
        [0.0, 1.0],
        [-1.0, 0.0],
    ])
    return EmbeddingMatrix(uris, center)
