"""
Tests for the binary graph cache.
"""

import numpy as np
import pytest

from src.errors import DataError
from src.graph.cache import load_graph_cache, save_graph_cache


def test_cache_round_trip(tmp_path, apicidin_graph):
    path = tmp_path / "graph.kgc"
    save_graph_cache(apicidin_graph, path)
    loaded = load_graph_cache(path)

    assert loaded.node_uris == apicidin_graph.node_uris
    assert loaded.type_registry == apicidin_graph.type_registry
    for name in ("node_types", "edge_list", "csr_offsets", "csr_neighbors", "csr_edge_types"):
        np.testing.assert_array_equal(getattr(loaded, name), getattr(apicidin_graph, name))
    assert loaded.stats == apicidin_graph.stats
    assert loaded.type_counts() == {"pubchem_compound": 1, "gene": 16}


def test_cache_bytes_are_stable(tmp_path, two_relation_graph):
    first, second = tmp_path / "a.kgc", tmp_path / "b.kgc"
    save_graph_cache(two_relation_graph, first)
    save_graph_cache(load_graph_cache(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_cache_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.kgc"
    path.write_bytes(b"NOTAGRAPH" * 10)
    with pytest.raises(DataError, match="not a graph cache"):
        load_graph_cache(path)


def test_cache_rejects_truncated_file(tmp_path, path_graph):
    path = tmp_path / "graph.kgc"
    save_graph_cache(path_graph, path)
    path.write_bytes(path.read_bytes()[:-20])
    with pytest.raises(DataError, match="truncated"):
        load_graph_cache(path)
