"""
Uniform (DeepWalk) walker.
"""

import numpy as np

from src.walkers.base_walker import BaseWalker, WalkResult, uniform_pick


class UniformWalker(BaseWalker):
    """Each step picks a CSR neighbor entry uniformly."""

    name = "uniform"

    def walk(self, start: int, rng: np.random.Generator) -> WalkResult:
        nodes = [int(start)]
        edge_types = []
        curr = int(start)
        while len(nodes) < self.config.walk_length:
            nbrs, types = self._slice(curr)
            if len(nbrs) == 0:
                return WalkResult(nodes, edge_types, truncated=True)
            i = uniform_pick(len(nbrs), rng)
            curr = int(nbrs[i])
            nodes.append(curr)
            edge_types.append(int(types[i]))
        return WalkResult(nodes, edge_types, truncated=False)
