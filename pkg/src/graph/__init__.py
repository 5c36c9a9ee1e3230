"""
Graph storage: triple ingestion, typed CSR graph, binary cache.
"""

from src.graph.cache import load_graph_cache, save_graph_cache
from src.graph.store import (
    HeteroGraph,
    IngestStats,
    TypeRegistry,
    TypeRuleSet,
    has_edge,
    ingest_triples,
    load_triples_file,
    neighbors,
    nodes_by_type,
)

__all__ = [
    "HeteroGraph",
    "IngestStats",
    "TypeRegistry",
    "TypeRuleSet",
    "has_edge",
    "ingest_triples",
    "load_triples_file",
    "neighbors",
    "nodes_by_type",
    "load_graph_cache",
    "save_graph_cache",
]
