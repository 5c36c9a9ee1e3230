"""
Binary graph cache.

Layout (little-endian): magic, version, counts, a length-prefixed string
table (node type names, edge type names, node URIs), the raw arrays, and the
ingest statistics as JSON. Writing the same graph twice gives identical bytes.
"""

import json
import struct
from pathlib import Path
from typing import BinaryIO, List, Union

import numpy as np

from src.errors import DataError
from src.graph.store import HeteroGraph, IngestStats, TypeRegistry

MAGIC = b"KGCGRAPH"
VERSION = 1
_HEADER = struct.Struct("<8sIQQII")


def _write_strings(f: BinaryIO, strings: List[str]) -> None:
    for s in strings:
        data = s.encode("utf-8")
        f.write(struct.pack("<I", len(data)))
        f.write(data)


def _read_exact(f: BinaryIO, size: int) -> bytes:
    data = f.read(size)
    if len(data) != size:
        raise DataError("graph cache is truncated")
    return data


def _read_strings(f: BinaryIO, count: int) -> List[str]:
    out = []
    for _ in range(count):
        (length,) = struct.unpack("<I", _read_exact(f, 4))
        out.append(_read_exact(f, length).decode("utf-8"))
    return out


def _read_array(f: BinaryIO, dtype: str, count: int) -> np.ndarray:
    itemsize = np.dtype(dtype).itemsize
    return np.frombuffer(_read_exact(f, itemsize * count), dtype=dtype).copy()


def save_graph_cache(graph: HeteroGraph, path: Union[str, Path]) -> None:
    """Write ``graph`` to ``path`` in the versioned binary format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    registry = graph.type_registry
    with open(path, "wb") as f:
        f.write(_HEADER.pack(
            MAGIC,
            VERSION,
            graph.node_count,
            graph.edge_count,
            registry.node_type_count,
            registry.edge_type_count,
        ))
        _write_strings(f, registry.node_type_names)
        _write_strings(f, registry.edge_type_names)
        _write_strings(f, graph.node_uris)
        f.write(np.asarray(graph.node_types, dtype="<i4").tobytes())
        f.write(np.asarray(graph.edge_list, dtype="<i8").tobytes())
        f.write(np.asarray(graph.csr_offsets, dtype="<i8").tobytes())
        f.write(np.asarray(graph.csr_neighbors, dtype="<i8").tobytes())
        f.write(np.asarray(graph.csr_edge_types, dtype="<i4").tobytes())
        stats = json.dumps(graph.stats.as_dict(), sort_keys=True).encode("utf-8")
        f.write(struct.pack("<I", len(stats)))
        f.write(stats)


def load_graph_cache(path: Union[str, Path]) -> HeteroGraph:
    """
    Load a graph cache written by :func:`save_graph_cache`.

    Raises:
        DataError: wrong magic, mismatched version, or truncated file
    """
    with open(path, "rb") as f:
        magic, version, n_nodes, n_edges, n_node_types, n_edge_types = _HEADER.unpack(
            _read_exact(f, _HEADER.size)
        )
        if magic != MAGIC:
            raise DataError(f"{path}: not a graph cache")
        if version != VERSION:
            raise DataError(f"{path}: graph cache version {version}, expected {VERSION}")

        registry = TypeRegistry(_read_strings(f, n_node_types), _read_strings(f, n_edge_types))
        node_uris = _read_strings(f, n_nodes)
        node_types = _read_array(f, "<i4", n_nodes)
        edge_list = _read_array(f, "<i8", n_edges * 3).reshape(-1, 3)
        offsets = _read_array(f, "<i8", n_nodes + 1)
        neighbors = _read_array(f, "<i8", 2 * n_edges)
        edge_types = _read_array(f, "<i4", 2 * n_edges)
        (stats_len,) = struct.unpack("<I", _read_exact(f, 4))
        stats = IngestStats(**json.loads(_read_exact(f, stats_len).decode("utf-8")))

    if offsets[-1] != 2 * n_edges:
        raise DataError(f"{path}: CSR offsets do not match the edge count")

    return HeteroGraph(
        node_uris=node_uris,
        node_types=node_types.astype(np.int32),
        edge_list=edge_list.astype(np.int64),
        csr_offsets=offsets.astype(np.int64),
        csr_neighbors=neighbors.astype(np.int64),
        csr_edge_types=edge_types.astype(np.int32),
        type_registry=registry,
        stats=stats,
    )
