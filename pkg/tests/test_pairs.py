"""
Tests for labeled pair sets.
"""

import io

import pytest

from src.errors import DataError
from src.pairs import LabeledPairSet, load_labeled_pairs, save_labeled_pairs


def test_load_pairs_from_stream():
    text = "source,target,label\ns,t1,1\ns,t2,0\ns,t1,1\n"
    pairs = load_labeled_pairs(io.StringIO(text))
    assert len(pairs) == 2
    assert pairs.counts == (1, 1)
    assert pairs.duplicates_collapsed == 1
    assert pairs.label_of("s", "t1") == 1
    assert ("s", "t2") in pairs


def test_conflicting_labels_rejected():
    text = "source,target,label\ns,t1,1\ns,t1,0\n"
    with pytest.raises(DataError, match="conflicting labels for pair") as excinfo:
        load_labeled_pairs(io.StringIO(text))
    assert excinfo.value.line_number == 3


def test_bad_label_rejected():
    text = "source,target,label\ns,t1,yes\n"
    with pytest.raises(DataError, match="label must be 0 or 1") as excinfo:
        load_labeled_pairs(io.StringIO(text))
    assert excinfo.value.line_number == 2


def test_missing_header_rejected():
    with pytest.raises(DataError, match="header"):
        load_labeled_pairs(io.StringIO("a,b,c\nx,y,1\n"))
    with pytest.raises(DataError, match="empty"):
        load_labeled_pairs(io.StringIO(""))


def test_pair_set_summaries():
    pairs = LabeledPairSet([("b", "x", 1), ("a", "y", 0), ("b", "z", 1), ("a", "x", 1)], provenance="unit")
    assert pairs.sources() == ["a", "b"]
    assert pairs.positives_per_source() == {"b": 2, "a": 1}
    assert list(pairs)[0] == ("b", "x", 1)
    with pytest.raises(DataError):
        pairs.add("a", "q", 2)


def test_save_and_reload(tmp_path):
    pairs = LabeledPairSet([("s", "t1", 1), ("s", "t2", 0)])
    path = tmp_path / "pairs.csv"
    save_labeled_pairs(pairs, path)
    assert path.read_text(encoding="utf-8") == "source,target,label\ns,t1,1\ns,t2,0\n"
    reloaded = load_labeled_pairs(path)
    assert list(reloaded) == list(pairs)
    assert reloaded.provenance == str(path)
