"""
Metapath-guided walker.

A metapath is a cyclic sequence of node types whose first and last entries
are equal; position ``i`` of a walk must have type ``metapath[i % (len - 1)]``.
"""

from typing import List, Sequence

import numpy as np

from src.errors import DataError
from src.graph.store import HeteroGraph, TypeRegistry
from src.walkers.base_walker import BaseWalker, WalkResult, uniform_pick

DEAD_END = -1


class Metapath:
    """Cyclic node-type schema for walks."""

    def __init__(self, type_indices: Sequence[int], names: Sequence[str] = ()):
        self.types: List[int] = [int(t) for t in type_indices]
        self.names: List[str] = list(names) or [str(t) for t in self.types]
        if len(self.types) < 2:
            raise DataError("a metapath needs at least two types")
        if self.types[0] != self.types[-1]:
            raise DataError(
                f"metapath must be cyclic (first type {self.names[0]!r} "
                f"!= last type {self.names[-1]!r})"
            )

    @classmethod
    def from_names(cls, names: Sequence[str], registry: TypeRegistry) -> "Metapath":
        """Resolve type names; unknown names raise ``DataError`` naming the type."""
        return cls([registry.node_type_index(n) for n in names], names)

    @property
    def head(self) -> int:
        return self.types[0]

    def expected_type(self, position: int) -> int:
        return self.types[position % (len(self.types) - 1)]

    def __len__(self) -> int:
        return len(self.types)


def load_metapath_file(path: str) -> List[str]:
    """Read one type name per line; blank lines and ``#`` comments are skipped."""
    with open(path, "r", encoding="utf-8") as f:
        names = [line.strip() for line in f if line.strip() and not line.lstrip().startswith("#")]
    if not names:
        raise DataError(f"{path}: empty metapath file")
    return names


def metapath_next(
    graph: HeteroGraph,
    curr: int,
    expected_type: int,
    rng: np.random.Generator,
) -> int:
    """
    Uniformly pick a neighbor of ``curr`` whose node type is ``expected_type``.

    Returns:
        The neighbor index, or ``DEAD_END`` when no neighbor has that type
    """
    nbrs, _ = graph.neighbor_arrays(curr)
    candidates = nbrs[graph.node_types[nbrs] == expected_type]
    if len(candidates) == 0:
        return DEAD_END
    return int(candidates[uniform_pick(len(candidates), rng)])


class MetapathWalker(BaseWalker):
    """Walks that follow a cyclic metapath, starting at nodes of its head type."""

    name = "metapath"

    def __init__(self, graph, config, metapath: Metapath):
        super().__init__(graph, config)
        self.metapath = metapath

    def start_nodes(self) -> np.ndarray:
        starts = self.graph.nodes_by_type(self.metapath.head)
        if len(starts) == 0:
            raise DataError(f"metapath head type {self.metapath.names[0]!r} has no nodes")
        return starts

    def walk(self, start: int, rng: np.random.Generator) -> WalkResult:
        nodes = [int(start)]
        curr = int(start)
        while len(nodes) < self.config.walk_length:
            nxt = metapath_next(self.graph, curr, self.metapath.expected_type(len(nodes)), rng)
            if nxt == DEAD_END:
                return WalkResult(nodes, [], truncated=True)
            curr = nxt
            nodes.append(curr)
        return WalkResult(nodes, [], truncated=False)
