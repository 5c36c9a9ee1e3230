"""
edge2vec: walks biased by an edge-type x edge-type transition matrix.

The matrix is trained by alternating two steps, starting from a uniform
matrix: sample walks under the current matrix and count edge-type
co-occurrences within a window (E-step), then set each row to the
Laplace-smoothed normalized counts (M-step).
"""

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import WalkConfig
from src.errors import DataError
from src.graph.store import HeteroGraph, TypeRegistry
from src.walkers.base_walker import BaseWalker, WalkResult, uniform_pick, weighted_pick

logger = logging.getLogger(__name__)


class TransitionMatrix:
    """Row-stochastic edge-type transition weights."""

    def __init__(self, weights: np.ndarray, edge_type_names: Sequence[str] = ()):
        weights = np.array(weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise DataError(f"transition matrix must be square, got shape {weights.shape}")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise DataError("transition matrix entries must be finite and >= 0")
        sums = weights.sum(axis=1, keepdims=True)
        if np.any(sums == 0):
            raise DataError("transition matrix has an all-zero row")
        self.weights = weights / sums
        self.edge_type_names = list(edge_type_names)

    @classmethod
    def uniform(cls, n: int, edge_type_names: Sequence[str] = ()) -> "TransitionMatrix":
        return cls(np.full((n, n), 1.0 / n), edge_type_names)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def row(self, edge_type: int) -> np.ndarray:
        return self.weights[edge_type]

    def save(self, path: Union[str, Path]) -> None:
        """TSV with an edge-type header row, floats at round-trip precision."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        names = self.edge_type_names or [str(i) for i in range(self.size)]
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\t".join(["edge_type"] + names) + "\n")
            for name, row in zip(names, self.weights):
                f.write("\t".join([name] + [f"{v:.17g}" for v in row]) + "\n")

    @classmethod
    def load(cls, path: Union[str, Path], registry: Optional[TypeRegistry] = None) -> "TransitionMatrix":
        with open(path, "r", encoding="utf-8") as f:
            rows = [line.rstrip("\n").split("\t") for line in f if line.strip()]
        names = rows[0][1:]
        if registry is not None and names != registry.edge_type_names:
            raise DataError(f"{path}: edge types do not match the graph")
        try:
            weights = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
        except ValueError as e:
            raise DataError(f"{path}: bad matrix entry: {e}") from e
        return cls(weights, names)


def m_step(counts: np.ndarray, smoothing: float = 1.0) -> np.ndarray:
    """Laplace-smoothed row normalization of co-occurrence counts."""
    smoothed = np.asarray(counts, dtype=np.float64) + smoothing
    return smoothed / smoothed.sum(axis=1, keepdims=True)


def cooccurrence_counts(
    edge_type_walks: Sequence[np.ndarray],
    n_types: int,
    window: int,
) -> np.ndarray:
    """Symmetric counts of edge types appearing within ``window`` positions of each other."""
    counts = np.zeros((n_types, n_types), dtype=np.float64)
    for seq in edge_type_walks:
        seq = np.asarray(seq, dtype=np.int64)
        for offset in range(1, window + 1):
            if offset >= len(seq):
                break
            a, b = seq[:-offset], seq[offset:]
            np.add.at(counts, (a, b), 1.0)
            np.add.at(counts, (b, a), 1.0)
    return counts


def _edge2vec_choice(
    matrix: TransitionMatrix,
    prev_edge_type: Optional[int],
    candidate_types: np.ndarray,
    rng: np.random.Generator,
) -> Tuple[int, bool]:
    """Index of the chosen CSR entry and whether it fell back to uniform."""
    n = len(candidate_types)
    if prev_edge_type is None:
        return uniform_pick(n, rng), False
    weights = matrix.row(prev_edge_type)[candidate_types]
    if not weights.sum() > 0:
        return uniform_pick(n, rng), True
    return weighted_pick(weights, rng), False


def edge2vec_step(
    graph: HeteroGraph,
    prev_edge_type: Optional[int],
    curr: int,
    matrix: TransitionMatrix,
    rng: np.random.Generator,
) -> Tuple[int, int]:
    """
    Sample the next (node, edge type) from ``curr``.

    Neighbor ``(v, t)`` is drawn with probability proportional to
    ``M[prev_edge_type][t]``; uniformly on the first step or when every
    candidate weight is zero.

    Raises:
        DataError: ``curr`` has no neighbors
    """
    nbrs, types = graph.neighbor_arrays(curr)
    if len(nbrs) == 0:
        raise DataError(f"node {curr} has no neighbors")
    i, fell_back = _edge2vec_choice(matrix, prev_edge_type, types, rng)
    if fell_back:
        logger.debug("edge2vec step fell back to uniform at node %d", curr)
    return int(nbrs[i]), int(types[i])


class Edge2VecWalker(BaseWalker):
    """Walker whose steps are weighted by a :class:`TransitionMatrix`."""

    name = "edge2vec"

    def __init__(self, graph, config, matrix: TransitionMatrix, walks_per_node: Optional[int] = None):
        if walks_per_node is not None:
            config = config.model_copy(update={"walks_per_node": walks_per_node})
        super().__init__(graph, config)
        if matrix.size != graph.type_registry.edge_type_count:
            raise DataError(
                f"transition matrix size {matrix.size} != edge type count "
                f"{graph.type_registry.edge_type_count}"
            )
        self.matrix = matrix

    def walk(self, start: int, rng: np.random.Generator) -> WalkResult:
        nodes = [int(start)]
        edge_types: List[int] = []
        fallbacks = 0
        curr = int(start)
        prev_type: Optional[int] = None
        while len(nodes) < self.config.walk_length:
            nbrs, types = self._slice(curr)
            if len(nbrs) == 0:
                return WalkResult(nodes, edge_types, truncated=True, fallback_steps=fallbacks)
            i, fell_back = _edge2vec_choice(self.matrix, prev_type, types, rng)
            fallbacks += fell_back
            curr, prev_type = int(nbrs[i]), int(types[i])
            nodes.append(curr)
            edge_types.append(prev_type)
        return WalkResult(nodes, edge_types, truncated=False, fallback_steps=fallbacks)


def em_train_transition(
    graph: HeteroGraph,
    config: WalkConfig,
    seed: Optional[int] = None,
    show_progress: bool = False,
) -> TransitionMatrix:
    """
    Train the edge-type transition matrix.

    Args:
        graph: Graph with at least one edge type
        config: ``em_iterations``, ``em_window``, ``em_walks_per_node`` and
            ``walk_length`` are used
        seed: Master seed; defaults to ``config.seed``

    Returns:
        The trained matrix; every row sums to 1

    Raises:
        DataError: the graph has no edge types
    """
    names = graph.type_registry.edge_type_names
    n = len(names)
    if n == 0:
        raise DataError("edge2vec needs at least one edge type")
    seed = config.seed if seed is None else seed

    matrix = TransitionMatrix.uniform(n, names)
    for iteration in range(config.em_iterations):
        iteration_seed = int(np.random.SeedSequence([seed, iteration]).generate_state(1)[0])
        walker = Edge2VecWalker(graph, config, matrix, walks_per_node=config.em_walks_per_node)
        corpus = walker.generate(seed=iteration_seed, show_progress=show_progress)
        counts = cooccurrence_counts(corpus.edge_types, n, config.em_window)
        matrix = TransitionMatrix(m_step(counts), names)
        logger.info("edge2vec EM iteration=%d pairs_counted=%d", iteration + 1, int(counts.sum()))
    return matrix
