"""
End-to-end CLI tests: every subcommand against a small drug-gene graph.
"""

import json

import pandas as pd
import pytest

from src.errors import DataError, NodeIndexError
from src.main import build_parser, collect_overrides, main
from src.pipeline.commands import _strategy_context
from tests.graphs import COMPOUND, GENES, INTERACTS, gene_uri, nt

VORINOSTAT = "http://chem2bio2rdf.org/pubchem/resource/pubchem_compound/5311"
PPI = "http://chem2bio2rdf.org/ppi/resource/binds"

CONFIG = """
seed: 5
paths:
  triples: triples.nt
  output_dir: out
walk:
  strategies: [uniform]
  strategy: uniform
  walk_length: 8
  walks_per_node: 3
  em_iterations: 1
train:
  dim: 8
  window: 2
  negatives: 2
  epochs: 1
  loss_sample_size: 100
baseline:
  n_pos: 5
  n_neg: 5
  validation_fraction: 0.2
evaluation:
  k_values: [2]
rank:
  k: 3
"""


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    lines = [nt(COMPOUND, INTERACTS, gene_uri(g)) for g in GENES]
    lines += [nt(VORINOSTAT, INTERACTS, gene_uri(g)) for g in ("HDAC1", "HDAC2", "HDAC3", "HDAC6", "HDAC8")]
    lines.append(nt(gene_uri("HDAC1"), PPI, gene_uri("HDAC2")))
    (tmp_path / "triples.nt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (tmp_path / "config.yaml").write_text(CONFIG, encoding="utf-8")
    (tmp_path / "test.csv").write_text(
        "source,target,label\n"
        f"{VORINOSTAT},{gene_uri('HDAC4')},1\n"
        f"{VORINOSTAT},{gene_uri('HDAC5')},1\n"
        f"{VORINOSTAT},{gene_uri('HD1B')},0\n"
        f"{VORINOSTAT},{gene_uri('F3')},0\n",
        encoding="utf-8",
    )
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*argv):
    return main(["--config", "config.yaml", "--quiet", *argv])


def test_full_command_sequence(workspace, capsys):
    assert run("ingest") == 0
    assert (workspace / "out" / "graph.kgc").exists()
    assert "18 nodes, 22 edges" in capsys.readouterr().out

    assert run("walk", "--strategy", "uniform", "--format", "index") == 0
    assert (workspace / "out" / "corpus" / "uniform.walks.nodes").exists()

    assert run("train", "--strategy", "uniform", "--strategy", "metapath", "--strategy", "edge2vec") == 0
    for strategy in ("uniform", "metapath", "edge2vec"):
        assert (workspace / "out" / "embeddings" / f"{strategy}.bin").exists()
        assert (workspace / "out" / "embeddings" / f"{strategy}.txt").exists()
    assert (workspace / "out" / "transition" / "edge2vec.tsv").exists()
    manifest = json.loads((workspace / "out" / "manifests" / "uniform.json").read_text(encoding="utf-8"))
    assert manifest["strategy"] == "uniform"
    assert manifest["seed"] == 5
    assert manifest["training"]["sampled_mean_loss"] > 0

    assert run("rank", COMPOUND, "--target-type", "gene", "--mark-existing") == 0
    ranking = pd.read_csv(workspace / "out" / "rankings" / "uniform.csv")
    assert len(ranking) == 3
    assert ranking["target"].str.contains("/gene/").all()
    assert ranking["existing"].tolist() == [1, 1, 1]

    assert run("evaluate", "--test-set", "test.csv") == 0
    report = pd.read_csv(workspace / "out" / "reports" / "report.csv")
    assert report["method"].tolist() == ["logreg", "topK@2"]
    assert report["test_set"].tolist() == ["test", "test"]
    assert (workspace / "out" / "predictions" / "uniform_test_top2.csv").exists()
    assert (workspace / "out" / "baseline" / "uniform.logreg").exists()

    assert run("inspect", "--embeddings", "out/embeddings/uniform.bin") == 0
    out = capsys.readouterr().out
    assert "nodes: 18" in out
    assert "dim: 8" in out


def test_rank_excluding_existing_links(workspace):
    assert run("ingest") == 0
    assert run("train") == 0
    assert run("rank", VORINOSTAT, "--k", "20", "--exclude-existing", "--output", "vor.csv") == 0
    targets = set(pd.read_csv(workspace / "vor.csv")["target"])
    assert gene_uri("HDAC1") not in targets
    assert gene_uri("HDAC4") in targets


def test_missing_config_file_exits_2(workspace):
    assert main(["--config", "nope.yaml", "ingest"]) == 2


def test_bad_set_value_exits_2(workspace):
    assert main(["--config", "config.yaml", "--set", "walk.p=-1", "ingest"]) == 2


def test_missing_triples_exits_2(workspace):
    assert run("ingest", "--triples", "absent.nt") == 2


def test_malformed_triples_exit_3(workspace):
    (workspace / "triples.nt").write_text("this is not a triple\n", encoding="utf-8")
    assert run("ingest") == 3


def test_commands_before_ingest_exit_3(workspace):
    assert run("train") == 3
    assert run("walk") == 3


def test_unknown_rank_source_exits_3(workspace):
    assert run("ingest") == 0
    assert run("train") == 0
    assert run("rank", "http://chem2bio2rdf.org/pubchem/resource/pubchem_compound/46780") == 3


def test_unknown_metapath_type_exits_3(workspace):
    assert run("ingest") == 0
    assert run("train", "--strategy", "metapath", "--metapath", "drug", "gene", "drug") == 3


def test_inspect_without_artifacts_exits_2(workspace):
    assert run("inspect") == 2


def test_parser_rejects_unknown_strategy():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["train", "--strategy", "deepwalk"])


def test_flags_become_overrides():
    args = build_parser().parse_args(
        ["--seed", "9", "--set", "train.dim=4", "train", "--strategy", "node2vec", "--p", "0.5", "--dim", "16"]
    )
    overrides = collect_overrides(args)
    assert overrides["seed"] == 9
    assert overrides["walk.p"] == 0.5
    assert overrides["walk.strategies"] == ["node2vec"]
    assert overrides["train.dim"] == 4


def test_evaluate_caps_baseline_links_on_small_graph(workspace):
    assert run("ingest") == 0
    assert run("train") == 0
    argv = ["--config", "config.yaml", "--quiet", "--set", "baseline.n_pos=1000", "--set", "baseline.n_neg=1000"]
    assert main(argv + ["evaluate", "--test-set", "test.csv"]) == 0

    assert (workspace / "out" / "reports" / "report.csv").exists()
    manifest = json.loads((workspace / "out" / "manifests" / "evaluate.json").read_text(encoding="utf-8"))
    validation = manifest["baseline_validation"]["uniform"]
    assert validation["train_pairs"] + validation["validation_pairs"] == 22


def test_strategy_context_keeps_error_attributes():
    wrapped = _strategy_context("node2vec", DataError("bad triple", 7))
    assert isinstance(wrapped, DataError)
    assert wrapped.line_number == 7
    assert str(wrapped) == "[node2vec] line 7: bad triple"

    index_error = _strategy_context("uniform", NodeIndexError("node 99 out of range"))
    assert isinstance(index_error, IndexError)
    assert index_error.line_number is None
