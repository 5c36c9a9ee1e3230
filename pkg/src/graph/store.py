"""
Typed, interned, immutable knowledge graph with CSR adjacency.

Triples are read from N-Triples-like or TSV lines. Every triple becomes an
undirected edge for walking; the predicate is kept as the edge type.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union
from urllib.parse import urlparse

import numpy as np

from src.errors import DataError, NodeIndexError

logger = logging.getLogger(__name__)

FALLBACK_NODE_TYPE = "entity"

_NT_LINE = re.compile(
    r'^<([^>]*)>\s+<([^>]*)>\s+(?:<([^>]*)>|("(?:[^"\\]|\\.)*"(?:@[\w-]+|\^\^<[^>]*>)?))\s*\.\s*$'
)


class TypeRegistry:
    """Bidirectional name <-> dense index lookup for node and edge types."""

    def __init__(
        self,
        node_type_names: Sequence[str] = (),
        edge_type_names: Sequence[str] = (),
    ):
        self.node_type_names: List[str] = []
        self.edge_type_names: List[str] = []
        self._node_index: Dict[str, int] = {}
        self._edge_index: Dict[str, int] = {}
        for name in node_type_names:
            self.register_node_type(name)
        for name in edge_type_names:
            self.register_edge_type(name)

    def register_node_type(self, name: str) -> int:
        index = self._node_index.get(name)
        if index is None:
            index = self._node_index[name] = len(self.node_type_names)
            self.node_type_names.append(name)
        return index

    def register_edge_type(self, name: str) -> int:
        index = self._edge_index.get(name)
        if index is None:
            index = self._edge_index[name] = len(self.edge_type_names)
            self.edge_type_names.append(name)
        return index

    def node_type_index(self, name: str) -> int:
        try:
            return self._node_index[name]
        except KeyError:
            raise DataError(f"unknown node type: {name!r}") from None

    def edge_type_index(self, name: str) -> int:
        try:
            return self._edge_index[name]
        except KeyError:
            raise DataError(f"unknown edge type: {name!r}") from None

    @property
    def node_type_count(self) -> int:
        return len(self.node_type_names)

    @property
    def edge_type_count(self) -> int:
        return len(self.edge_type_names)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TypeRegistry):
            return NotImplemented
        return (
            self.node_type_names == other.node_type_names
            and self.edge_type_names == other.edge_type_names
        )


class TypeRuleSet:
    """
    Ordered URI-substring rules mapping URIs to node type names.

    The first matching rule wins. Without a match the type is the
    second-to-last path segment of the URI.
    """

    def __init__(self, rules: Sequence[Tuple[str, str]] = ()):
        self.rules: List[Tuple[str, str]] = [(p, t) for p, t in rules]
        for pattern, type_name in self.rules:
            if not pattern or not type_name:
                raise DataError(f"empty pattern or type name in rule {(pattern, type_name)!r}")

    @classmethod
    def from_file(cls, path: str) -> "TypeRuleSet":
        """Load rules from a TSV file of ``pattern TAB typename`` lines."""
        rules = []
        with open(path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                line = line.rstrip("\r\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) != 2 or not fields[0] or not fields[1].strip():
                    raise DataError(f"{path}: expected 'pattern<TAB>typename'", line_number)
                rules.append((fields[0], fields[1].strip()))
        return cls(rules)

    @staticmethod
    def fallback_type(uri: str) -> str:
        segments = [s for s in urlparse(uri).path.split("/") if s]
        if len(segments) >= 2:
            return segments[-2]
        return FALLBACK_NODE_TYPE

    def infer(self, uri: str) -> str:
        for pattern, type_name in self.rules:
            if pattern in uri:
                return type_name
        return self.fallback_type(uri)


@dataclass
class IngestStats:
    lines_read: int = 0
    triples_parsed: int = 0
    duplicates_dropped: int = 0
    self_loops_dropped: int = 0
    literals_skipped: int = 0
    ignored_lines: int = 0

    def as_dict(self) -> Dict[str, int]:
        return dict(self.__dict__)


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(eq=False)
class HeteroGraph:
    """
    Immutable typed graph.

    ``csr_neighbors``/``csr_edge_types`` hold, for node ``u``, the range
    ``csr_offsets[u]:csr_offsets[u+1]`` sorted by neighbor index then edge type.
    """
    node_uris: List[str]
    node_types: np.ndarray
    edge_list: np.ndarray
    csr_offsets: np.ndarray
    csr_neighbors: np.ndarray
    csr_edge_types: np.ndarray
    type_registry: TypeRegistry
    stats: IngestStats = field(default_factory=IngestStats)

    def __post_init__(self):
        self._uri_index = {uri: i for i, uri in enumerate(self.node_uris)}
        for name in ("node_types", "edge_list", "csr_offsets", "csr_neighbors", "csr_edge_types"):
            _readonly(getattr(self, name))

    @classmethod
    def build(
        cls,
        node_uris: List[str],
        node_types: Sequence[int],
        edges: Sequence[Tuple[int, int, int]],
        type_registry: TypeRegistry,
        stats: Optional[IngestStats] = None,
    ) -> "HeteroGraph":
        """
        Build the CSR arrays from deduplicated (source, destination, edge type) records.

        Raises:
            DataError: an edge references an unknown node or edge type
        """
        n = len(node_uris)
        edge_list = np.asarray(edges, dtype=np.int64).reshape(-1, 3)
        if edge_list.size:
            if edge_list[:, :2].min() < 0 or edge_list[:, :2].max() >= n:
                raise DataError("edge references a node index outside the graph")
            if edge_list[:, 2].min() < 0 or edge_list[:, 2].max() >= type_registry.edge_type_count:
                raise DataError("edge references an unregistered edge type")

        src = np.concatenate([edge_list[:, 0], edge_list[:, 1]])
        dst = np.concatenate([edge_list[:, 1], edge_list[:, 0]])
        etype = np.concatenate([edge_list[:, 2], edge_list[:, 2]])
        order = np.lexsort((etype, dst, src))

        counts = np.bincount(src, minlength=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])

        return cls(
            node_uris=list(node_uris),
            node_types=np.asarray(node_types, dtype=np.int32),
            edge_list=edge_list,
            csr_offsets=offsets,
            csr_neighbors=dst[order].astype(np.int64),
            csr_edge_types=etype[order].astype(np.int32),
            type_registry=type_registry,
            stats=stats or IngestStats(),
        )

    @property
    def node_count(self) -> int:
        return len(self.node_uris)

    @property
    def edge_count(self) -> int:
        """Number of deduplicated undirected edges."""
        return int(self.edge_list.shape[0])

    @property
    def directed_edge_count(self) -> int:
        return int(self.csr_offsets[-1])

    def _check(self, node: int) -> int:
        if not 0 <= node < self.node_count:
            raise NodeIndexError(f"node index {node} out of range [0, {self.node_count})")
        return int(node)

    def index_of(self, uri: str) -> int:
        try:
            return self._uri_index[uri]
        except KeyError:
            raise DataError(f"unknown node: {uri}") from None

    def contains(self, uri: str) -> bool:
        return uri in self._uri_index

    def uri_of(self, node: int) -> str:
        return self.node_uris[self._check(node)]

    def node_type_name(self, node: int) -> str:
        return self.type_registry.node_type_names[self.node_types[self._check(node)]]

    def degree(self, node: int) -> int:
        node = self._check(node)
        return int(self.csr_offsets[node + 1] - self.csr_offsets[node])

    def neighbor_arrays(self, node: int) -> Tuple[np.ndarray, np.ndarray]:
        """Views of the node's CSR range: (neighbor indices, edge types)."""
        node = self._check(node)
        lo, hi = self.csr_offsets[node], self.csr_offsets[node + 1]
        return self.csr_neighbors[lo:hi], self.csr_edge_types[lo:hi]

    def neighbors(self, node: int) -> List[Tuple[int, int]]:
        nbrs, types = self.neighbor_arrays(node)
        return [(int(v), int(t)) for v, t in zip(nbrs, types)]

    def has_edge(self, u: int, v: int) -> bool:
        u = self._check(u)
        v = self._check(v)
        lo, hi = self.csr_offsets[u], self.csr_offsets[u + 1]
        pos = lo + np.searchsorted(self.csr_neighbors[lo:hi], v)
        return bool(pos < hi and self.csr_neighbors[pos] == v)

    def _type_index(self, node_type: Union[int, str]) -> int:
        if isinstance(node_type, str):
            return self.type_registry.node_type_index(node_type)
        if not 0 <= node_type < self.type_registry.node_type_count:
            raise DataError(f"unknown node type index: {node_type}")
        return int(node_type)

    def nodes_by_type(self, node_type: Union[int, str]) -> np.ndarray:
        return np.flatnonzero(self.node_types == self._type_index(node_type))

    def type_counts(self) -> Dict[str, int]:
        counts = np.bincount(self.node_types, minlength=self.type_registry.node_type_count)
        return {name: int(c) for name, c in zip(self.type_registry.node_type_names, counts)}

    def edge_type_counts(self) -> Dict[str, int]:
        counts = np.bincount(self.edge_list[:, 2], minlength=self.type_registry.edge_type_count)
        return {name: int(c) for name, c in zip(self.type_registry.edge_type_names, counts)}


def parse_triple(line: str, line_number: int) -> Optional[Tuple[str, str, Optional[str]]]:
    """
    Parse one input line.

    Returns:
        (subject, predicate, object) where object is None for a literal,
        or None for blank and comment lines

    Raises:
        DataError: the line is neither N-Triples-like nor 3-column TSV
    """
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None

    match = _NT_LINE.match(stripped)
    if match:
        return match.group(1), match.group(2), match.group(3)

    fields = line.rstrip("\r\n").split("\t")
    if len(fields) == 3:
        cleaned = []
        for value in fields:
            value = value.strip()
            if value.startswith("<") and value.endswith(">"):
                value = value[1:-1]
            cleaned.append(value)
        if all(cleaned):
            subject, predicate, obj = cleaned
            if obj.startswith('"'):
                return subject, predicate, None
            return subject, predicate, obj

    raise DataError("malformed triple (expected '<s> <p> <o> .' or 's<TAB>p<TAB>o')", line_number)


def ingest_triples(
    reader: Iterable[str],
    rules: Optional[TypeRuleSet] = None,
    skip_literals: bool = False,
) -> HeteroGraph:
    """
    Parse triples, infer node types, intern identifiers and build the graph.

    Args:
        reader: Line stream (file object or list of lines)
        rules: Node type rules; defaults to positional inference only
        skip_literals: Count and skip literal objects instead of failing

    Returns:
        The built graph; parse statistics are in ``graph.stats``

    Raises:
        DataError: malformed line (with line number), literal object in strict
            mode, or no edges at all
    """
    rules = rules or TypeRuleSet()
    registry = TypeRegistry()
    stats = IngestStats()
    uris: List[str] = []
    types: List[int] = []
    index: Dict[str, int] = {}
    seen = set()
    edges: List[Tuple[int, int, int]] = []

    def intern(uri: str) -> int:
        node = index.get(uri)
        if node is None:
            node = index[uri] = len(uris)
            uris.append(uri)
            types.append(registry.register_node_type(rules.infer(uri)))
        return node

    for line_number, line in enumerate(reader, start=1):
        stats.lines_read += 1
        parsed = parse_triple(line, line_number)
        if parsed is None:
            stats.ignored_lines += 1
            continue
        subject, predicate, obj = parsed
        if obj is None:
            if not skip_literals:
                raise DataError("literal objects are not supported", line_number)
            stats.literals_skipped += 1
            continue
        stats.triples_parsed += 1
        if subject == obj:
            stats.self_loops_dropped += 1
            continue

        s, o = intern(subject), intern(obj)
        t = registry.register_edge_type(predicate)
        key = (min(s, o), max(s, o), t)
        if key in seen:
            stats.duplicates_dropped += 1
            continue
        seen.add(key)
        edges.append((s, o, t))

    if not edges:
        raise DataError("empty graph")

    graph = HeteroGraph.build(uris, types, edges, registry, stats)
    logger.info(
        "ingested nodes=%d edges=%d node_types=%d edge_types=%d duplicates=%d self_loops=%d",
        graph.node_count,
        graph.edge_count,
        registry.node_type_count,
        registry.edge_type_count,
        stats.duplicates_dropped,
        stats.self_loops_dropped,
    )
    return graph


def load_triples_file(
    path: str,
    rules: Optional[TypeRuleSet] = None,
    skip_literals: bool = False,
) -> HeteroGraph:
    """Ingest a UTF-8 triples file."""
    with open(path, "r", encoding="utf-8") as f:
        return ingest_triples(f, rules, skip_literals)


def neighbors(graph: HeteroGraph, node: int) -> List[Tuple[int, int]]:
    return graph.neighbors(node)


def has_edge(graph: HeteroGraph, u: int, v: int) -> bool:
    return graph.has_edge(u, v)


def nodes_by_type(graph: HeteroGraph, node_type: Union[int, str]) -> np.ndarray:
    return graph.nodes_by_type(node_type)
