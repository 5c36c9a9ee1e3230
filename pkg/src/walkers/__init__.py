"""
Random-walk strategies: uniform (DeepWalk), node2vec, metapath, edge2vec.
"""

from typing import Optional

from src.config import WalkConfig
from src.errors import ConfigError
from src.graph.store import HeteroGraph
from src.walkers.base_walker import BaseWalker, WalkResult, walk_rng
from src.walkers.corpus import WalkCorpus, load_corpus, save_corpus
from src.walkers.edge2vec import (
    Edge2VecWalker,
    TransitionMatrix,
    edge2vec_step,
    em_train_transition,
    m_step,
)
from src.walkers.metapath import DEAD_END, Metapath, MetapathWalker, load_metapath_file, metapath_next
from src.walkers.node2vec import Node2VecWalker, node2vec_weight
from src.walkers.uniform import UniformWalker


def create_walker(
    graph: HeteroGraph,
    config: WalkConfig,
    transition: Optional[TransitionMatrix] = None,
    metapath: Optional[Metapath] = None,
    show_progress: bool = False,
) -> BaseWalker:
    """
    Build the walker for ``config.strategy``.

    For edge2vec the transition matrix is trained when not supplied; for
    metapath the metapath is resolved from ``config.metapath`` when not supplied.
    """
    strategy = config.strategy
    if strategy == "uniform":
        return UniformWalker(graph, config)
    if strategy == "node2vec":
        return Node2VecWalker(graph, config)
    if strategy == "metapath":
        if metapath is None:
            metapath = Metapath.from_names(config.metapath, graph.type_registry)
        return MetapathWalker(graph, config, metapath)
    if strategy == "edge2vec":
        if transition is None:
            transition = em_train_transition(graph, config, show_progress=show_progress)
        return Edge2VecWalker(graph, config, transition)
    raise ConfigError(f"unknown walk strategy: {strategy}")


def generate_corpus(
    graph: HeteroGraph,
    config: WalkConfig,
    seed: Optional[int] = None,
    transition: Optional[TransitionMatrix] = None,
    metapath: Optional[Metapath] = None,
    show_progress: bool = False,
) -> WalkCorpus:
    """Generate a walk corpus with the configured strategy."""
    walker = create_walker(graph, config, transition, metapath, show_progress)
    return walker.generate(seed=seed, show_progress=show_progress)


__all__ = [
    "BaseWalker",
    "DEAD_END",
    "Edge2VecWalker",
    "Metapath",
    "MetapathWalker",
    "Node2VecWalker",
    "TransitionMatrix",
    "UniformWalker",
    "WalkCorpus",
    "WalkResult",
    "create_walker",
    "edge2vec_step",
    "em_train_transition",
    "generate_corpus",
    "load_corpus",
    "load_metapath_file",
    "m_step",
    "metapath_next",
    "node2vec_weight",
    "save_corpus",
    "walk_rng",
]
