"""
Base walker class for all sampling strategies.
"""

import logging
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.config import WalkConfig, model_hash
from src.graph.store import HeteroGraph
from src.walkers.corpus import WalkCorpus

logger = logging.getLogger(__name__)


@dataclass
class WalkResult:
    nodes: List[int]
    edge_types: List[int]
    truncated: bool
    fallback_steps: int = 0


def walk_rng(seed: int, walk_number: int, start: int) -> np.random.Generator:
    """Independent RNG stream for one (start node, walk number) pair."""
    return np.random.default_rng(np.random.SeedSequence([seed, walk_number, int(start)]))


def uniform_pick(n: int, rng: np.random.Generator) -> int:
    return min(int(rng.random() * n), n - 1)


def weighted_pick(weights: np.ndarray, rng: np.random.Generator) -> int:
    """
    Draw an index with probability proportional to ``weights``.

    With all-equal weights this consumes the RNG exactly like
    :func:`uniform_pick` and returns the same index.
    """
    cumulative = np.cumsum(weights)
    x = rng.random() * cumulative[-1]
    return min(int(np.searchsorted(cumulative, x, side="right")), len(weights) - 1)


class BaseWalker(ABC):
    """Base class for random-walk corpus generators."""

    name = "base"

    def __init__(self, graph: HeteroGraph, config: WalkConfig):
        self.graph = graph
        self.config = config
        self._offsets = graph.csr_offsets
        self._neighbors = graph.csr_neighbors
        self._edge_types = graph.csr_edge_types

    def _slice(self, node: int) -> Tuple[np.ndarray, np.ndarray]:
        lo, hi = self._offsets[node], self._offsets[node + 1]
        return self._neighbors[lo:hi], self._edge_types[lo:hi]

    def start_nodes(self) -> np.ndarray:
        """Nodes that start walks; every node by default."""
        return np.arange(self.graph.node_count, dtype=np.int64)

    @abstractmethod
    def walk(self, start: int, rng: np.random.Generator) -> WalkResult:
        """Sample one walk beginning at ``start``."""
        pass

    def _run_jobs(self, jobs: Sequence[Tuple[int, int]], seed: int) -> List[WalkResult]:
        return [self.walk(start, walk_rng(seed, walk_number, start)) for walk_number, start in jobs]

    def generate(self, seed: Optional[int] = None, show_progress: bool = False) -> WalkCorpus:
        """
        Generate ``walks_per_node`` walks from every start node.

        Walks are ordered by walk number, then start node. Each walk has its
        own RNG stream, so the result does not depend on ``config.workers``.

        Args:
            seed: Master seed; defaults to ``config.seed``
            show_progress: Draw a tqdm bar

        Returns:
            The generated corpus
        """
        seed = self.config.seed if seed is None else seed
        starts = self.start_nodes()
        jobs = [
            (walk_number, int(start))
            for walk_number in range(self.config.walks_per_node)
            for start in starts
        ]

        workers = self.config.workers
        chunk = max(1, len(jobs) // (workers * 8))
        chunks = [jobs[i:i + chunk] for i in range(0, len(jobs), chunk)]
        results: List[WalkResult] = []
        with tqdm(total=len(jobs), desc=f"walks[{self.name}]", unit="walk",
                  disable=not show_progress) as bar:
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    for part in pool.map(lambda c: self._run_jobs(c, seed), chunks):
                        results.extend(part)
                        bar.update(len(part))
            else:
                for c in chunks:
                    results.extend(self._run_jobs(c, seed))
                    bar.update(len(c))

        corpus = WalkCorpus(
            walks=[np.asarray(r.nodes, dtype=np.int64) for r in results],
            strategy=self.name,
            seed=seed,
            config_hash=model_hash(self.config),
            edge_types=[np.asarray(r.edge_types, dtype=np.int64) for r in results],
            truncated=sum(r.truncated for r in results),
            fallback_steps=sum(r.fallback_steps for r in results),
        )
        logger.info(
            "corpus generated strategy=%s walks=%d tokens=%d truncated=%d",
            self.name, len(corpus), corpus.token_count, corpus.truncated,
        )
        return corpus
