"""
Embedding matrices and their text/binary formats.

Text: ``N D`` header, then ``uri v1 ... vD`` per node with 17 significant
digits. Binary: magic, version, counts, URI table, raw float64 matrices.
The binary file is the source of truth.
"""

import struct
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from src.errors import DataError, ModelError

MAGIC = b"KGCEMBED"
VERSION = 1
_HEADER = struct.Struct("<8sIQII")
_HAS_CONTEXT = 1


class EmbeddingMatrix:
    """Center vectors (used for similarity) and optional context vectors, keyed by URI."""

    def __init__(
        self,
        uris: Sequence[str],
        center: np.ndarray,
        context: Optional[np.ndarray] = None,
    ):
        center = np.asarray(center, dtype=np.float64)
        if center.ndim != 2 or center.shape[0] != len(uris):
            raise ModelError(f"center matrix shape {center.shape} does not match {len(uris)} nodes")
        if context is not None:
            context = np.asarray(context, dtype=np.float64)
            if context.shape != center.shape:
                raise ModelError(f"context shape {context.shape} != center shape {center.shape}")
        self.uris: List[str] = list(uris)
        self.center = center
        self.context = context
        self._index = {uri: i for i, uri in enumerate(self.uris)}
        if len(self._index) != len(self.uris):
            raise ModelError("duplicate URIs in embedding vocabulary")

    def __len__(self) -> int:
        return len(self.uris)

    def __contains__(self, uri: str) -> bool:
        return uri in self._index

    @property
    def dim(self) -> int:
        return int(self.center.shape[1])

    def row_of(self, uri: str) -> Optional[int]:
        return self._index.get(uri)

    def index_of(self, uri: str) -> int:
        try:
            return self._index[uri]
        except KeyError:
            raise DataError(f"node not in embedding vocabulary: {uri}") from None

    def vector(self, uri: str) -> np.ndarray:
        return self.center[self.index_of(uri)]

    def check_finite(self) -> None:
        if not np.all(np.isfinite(self.center)):
            raise ModelError("center vectors contain non-finite values")
        if self.context is not None and not np.all(np.isfinite(self.context)):
            raise ModelError("context vectors contain non-finite values")


def save_text(model: EmbeddingMatrix, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{len(model)} {model.dim}\n")
        for uri, row in zip(model.uris, model.center):
            f.write(uri + " " + " ".join(f"{v:.17g}" for v in row) + "\n")


def load_text(path: Union[str, Path]) -> EmbeddingMatrix:
    """
    Read the text format.

    Raises:
        DataError: header or row does not match the declared shape
    """
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: expected 'N D' header", 1)
        n, d = int(header[0]), int(header[1])
        uris = []
        center = np.empty((n, d), dtype=np.float64)
        for i in range(n):
            fields = f.readline().split()
            if len(fields) != d + 1:
                raise DataError(f"{path}: expected {d + 1} fields", i + 2)
            uris.append(fields[0])
            center[i] = [float(v) for v in fields[1:]]
    return EmbeddingMatrix(uris, center)


def save_binary(model: EmbeddingMatrix, path: Union[str, Path], include_context: bool = False) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with_context = include_context and model.context is not None
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, len(model), model.dim, _HAS_CONTEXT if with_context else 0))
        for uri in model.uris:
            data = uri.encode("utf-8")
            f.write(struct.pack("<I", len(data)))
            f.write(data)
        f.write(np.ascontiguousarray(model.center, dtype="<f8").tobytes())
        if with_context:
            f.write(np.ascontiguousarray(model.context, dtype="<f8").tobytes())


def load_binary(path: Union[str, Path], expected_dim: Optional[int] = None) -> EmbeddingMatrix:
    """
    Read the binary format.

    Raises:
        DataError: wrong magic, mismatched version or dimension, truncated file
    """
    def read(f, size):
        data = f.read(size)
        if len(data) != size:
            raise DataError(f"{path}: embedding file is truncated")
        return data

    with open(path, "rb") as f:
        magic, version, n, d, flags = _HEADER.unpack(read(f, _HEADER.size))
        if magic != MAGIC:
            raise DataError(f"{path}: not an embedding file")
        if version != VERSION:
            raise DataError(f"{path}: embedding format version {version}, expected {VERSION}")
        if expected_dim is not None and d != expected_dim:
            raise DataError(f"{path}: embedding dimension {d}, expected {expected_dim}")
        uris = []
        for _ in range(n):
            (length,) = struct.unpack("<I", read(f, 4))
            uris.append(read(f, length).decode("utf-8"))
        center = np.frombuffer(read(f, 8 * n * d), dtype="<f8").reshape(n, d).astype(np.float64)
        context = None
        if flags & _HAS_CONTEXT:
            context = np.frombuffer(read(f, 8 * n * d), dtype="<f8").reshape(n, d).astype(np.float64)
    return EmbeddingMatrix(uris, center, context)


def load_embeddings(path: Union[str, Path], expected_dim: Optional[int] = None) -> EmbeddingMatrix:
    """Load by extension: ``.txt`` is text, anything else binary."""
    if str(path).endswith(".txt"):
        model = load_text(path)
        if expected_dim is not None and model.dim != expected_dim:
            raise DataError(f"{path}: embedding dimension {model.dim}, expected {expected_dim}")
        return model
    return load_binary(path, expected_dim)
