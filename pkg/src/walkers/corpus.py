"""
Walk corpora and their text format.

One walk per line, space-separated node URIs (or integer indices plus a
``.nodes`` sidecar), preceded by ``#`` header lines with provenance.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Union

import numpy as np

from src.errors import DataError
from src.graph.store import HeteroGraph

HEADER_TAG = "# kgcomplete walk corpus"


@dataclass
class WalkCorpus:
    """Ordered walks (node index arrays) with provenance."""
    walks: List[np.ndarray]
    strategy: str
    seed: int
    config_hash: str
    edge_types: Optional[List[np.ndarray]] = None
    truncated: int = 0
    fallback_steps: int = 0

    def __len__(self) -> int:
        return len(self.walks)

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.walks)

    @property
    def token_count(self) -> int:
        return int(sum(len(w) for w in self.walks))

    def as_lists(self) -> List[List[int]]:
        return [w.tolist() for w in self.walks]


def _header(corpus: WalkCorpus, fmt: str) -> str:
    return (
        f"{HEADER_TAG}\n"
        f"# strategy={corpus.strategy} seed={corpus.seed} config_hash={corpus.config_hash} "
        f"walks={len(corpus)} truncated={corpus.truncated} format={fmt}\n"
    )


def save_corpus(
    corpus: WalkCorpus,
    graph: HeteroGraph,
    path: Union[str, Path],
    fmt: str = "uri",
) -> None:
    """
    Write a corpus file.

    Args:
        corpus: Corpus to write
        graph: Graph the walk indices refer to
        path: Output file
        fmt: ``uri`` (node URIs) or ``index`` (indices plus ``<path>.nodes``)
    """
    if fmt not in ("uri", "index"):
        raise DataError(f"unknown corpus format: {fmt}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(_header(corpus, fmt))
        for walk in corpus.walks:
            if fmt == "uri":
                f.write(" ".join(graph.node_uris[i] for i in walk))
            else:
                f.write(" ".join(str(int(i)) for i in walk))
            f.write("\n")
    if fmt == "index":
        with open(str(path) + ".nodes", "w", encoding="utf-8", newline="\n") as f:
            for uri in graph.node_uris:
                f.write(uri + "\n")


def _parse_header(line: str) -> Dict[str, str]:
    fields = {}
    for token in line.lstrip("#").split():
        if "=" in token:
            key, value = token.split("=", 1)
            fields[key] = value
    return fields


def load_corpus(path: Union[str, Path], graph: HeteroGraph) -> WalkCorpus:
    """
    Read a corpus file written by :func:`save_corpus`.

    Raises:
        DataError: missing header, unknown node, or malformed index line
    """
    meta: Dict[str, str] = {}
    walks: List[np.ndarray] = []
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines or lines[0] != HEADER_TAG:
        raise DataError(f"{path}: not a walk corpus")

    body_start = 1
    while body_start < len(lines) and lines[body_start].startswith("#"):
        meta.update(_parse_header(lines[body_start]))
        body_start += 1

    fmt = meta.get("format", "uri")
    sidecar: Optional[List[str]] = None
    if fmt == "index":
        with open(str(path) + ".nodes", "r", encoding="utf-8") as f:
            sidecar = f.read().splitlines()

    for line_number, line in enumerate(lines[body_start:], start=body_start + 1):
        tokens = line.split()
        if not tokens:
            continue
        if sidecar is None:
            walks.append(np.array([graph.index_of(t) for t in tokens], dtype=np.int64))
            continue
        try:
            uris = [sidecar[int(t)] for t in tokens]
        except (ValueError, IndexError):
            raise DataError(f"{path}: bad node index", line_number) from None
        walks.append(np.array([graph.index_of(u) for u in uris], dtype=np.int64))

    return WalkCorpus(
        walks=walks,
        strategy=meta.get("strategy", "unknown"),
        seed=int(meta.get("seed", 0)),
        config_hash=meta.get("config_hash", ""),
        truncated=int(meta.get("truncated", 0)),
    )
