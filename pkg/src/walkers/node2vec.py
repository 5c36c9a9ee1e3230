"""
node2vec second-order biased walker.

Weights are computed on the fly for each step with membership tests against
the previous node's sorted CSR range; no alias tables are precomputed.
"""

import numpy as np

from src.errors import ConfigError
from src.graph.store import HeteroGraph
from src.walkers.base_walker import BaseWalker, WalkResult, uniform_pick, weighted_pick


def node2vec_weight(
    prev: int,
    curr: int,
    candidate: int,
    p: float,
    q: float,
    graph: HeteroGraph,
) -> float:
    """
    Unnormalized transition weight from ``curr`` to ``candidate`` given ``prev``.

    Returns:
        1/p for a return to ``prev``, 1 if ``candidate`` neighbors ``prev``, else 1/q

    Raises:
        ConfigError: p or q not positive
    """
    if p <= 0 or q <= 0:
        raise ConfigError(f"node2vec p and q must be > 0 (p={p}, q={q})")
    if candidate == prev:
        return 1.0 / p
    if graph.has_edge(prev, candidate):
        return 1.0
    return 1.0 / q


class Node2VecWalker(BaseWalker):
    """Second-order walker with return parameter p and in-out parameter q."""

    name = "node2vec"

    def __init__(self, graph, config):
        super().__init__(graph, config)
        if config.p <= 0 or config.q <= 0:
            raise ConfigError(f"node2vec p and q must be > 0 (p={config.p}, q={config.q})")
        self._inv_p = 1.0 / config.p
        self._inv_q = 1.0 / config.q

    def step_weights(self, prev: int, candidates: np.ndarray) -> np.ndarray:
        """Vectorized :func:`node2vec_weight` over a CSR range."""
        prev_nbrs, _ = self._slice(prev)
        pos = np.searchsorted(prev_nbrs, candidates)
        pos = np.minimum(pos, len(prev_nbrs) - 1)
        adjacent = prev_nbrs[pos] == candidates
        return np.where(
            candidates == prev,
            self._inv_p,
            np.where(adjacent, 1.0, self._inv_q),
        )

    def walk(self, start: int, rng: np.random.Generator) -> WalkResult:
        nodes = [int(start)]
        edge_types = []
        prev = -1
        curr = int(start)
        while len(nodes) < self.config.walk_length:
            nbrs, types = self._slice(curr)
            if len(nbrs) == 0:
                return WalkResult(nodes, edge_types, truncated=True)
            if prev < 0:
                i = uniform_pick(len(nbrs), rng)
            else:
                i = weighted_pick(self.step_weights(prev, nbrs), rng)
            prev, curr = curr, int(nbrs[i])
            nodes.append(curr)
            edge_types.append(int(types[i]))
        return WalkResult(nodes, edge_types, truncated=False)
