"""
Tests for embedding persistence.
"""

import numpy as np
import pytest

from src.embedding.model import (
    EmbeddingMatrix,
    load_binary,
    load_embeddings,
    load_text,
    save_binary,
    save_text,
)
from src.errors import DataError, ModelError


@pytest.fixture
def model():
    rng = np.random.default_rng(3)
    uris = ["http://ex.org/node/a", "http://ex.org/node/b", "http://ex.org/node/ü"]
    return EmbeddingMatrix(uris, rng.normal(size=(3, 4)), rng.normal(size=(3, 4)))


def test_binary_is_exact(tmp_path, model):
    path = tmp_path / "e.bin"
    save_binary(model, path, include_context=True)
    loaded = load_binary(path, expected_dim=4)
    assert loaded.uris == model.uris
    np.testing.assert_array_equal(loaded.center, model.center)
    np.testing.assert_array_equal(loaded.context, model.context)

    save_binary(model, tmp_path / "plain.bin")
    assert load_binary(tmp_path / "plain.bin").context is None


def test_text_format(tmp_path, model):
    path = tmp_path / "e.txt"
    save_text(model, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "3 4"
    assert lines[1].split()[0] == "http://ex.org/node/a"
    loaded = load_embeddings(path)
    np.testing.assert_array_equal(loaded.center, model.center)


def test_dimension_mismatch_rejected(tmp_path, model):
    save_binary(model, tmp_path / "e.bin")
    with pytest.raises(DataError, match="dimension"):
        load_binary(tmp_path / "e.bin", expected_dim=8)
    save_text(model, tmp_path / "e.txt")
    with pytest.raises(DataError, match="dimension"):
        load_embeddings(tmp_path / "e.txt", expected_dim=8)


def test_bad_files_rejected(tmp_path, model):
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"x" * 64)
    with pytest.raises(DataError, match="not an embedding file"):
        load_binary(junk)

    path = tmp_path / "e.bin"
    save_binary(model, path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(DataError, match="truncated"):
        load_binary(path)

    text = tmp_path / "short.txt"
    text.write_text("2 3\nhttp://ex.org/a 1 2 3\nhttp://ex.org/b 1 2\n", encoding="utf-8")
    with pytest.raises(DataError) as excinfo:
        load_text(text)
    assert excinfo.value.line_number == 3


def test_matrix_validation():
    with pytest.raises(ModelError):
        EmbeddingMatrix(["a", "b"], np.zeros((3, 2)))
    with pytest.raises(ModelError):
        EmbeddingMatrix(["a", "a"], np.zeros((2, 2)))
    with pytest.raises(ModelError):
        EmbeddingMatrix(["a"], np.zeros((1, 2)), np.zeros((1, 3)))

    model = EmbeddingMatrix(["a"], np.array([[np.inf, 0.0]]))
    with pytest.raises(ModelError):
        model.check_finite()


def test_lookup(model):
    assert "http://ex.org/node/b" in model
    assert model.row_of("missing") is None
    with pytest.raises(DataError, match="not in embedding vocabulary"):
        model.vector("missing")
    np.testing.assert_array_equal(model.vector("http://ex.org/node/b"), model.center[1])
