"""
Graph builders and constants shared by the test modules.
"""

from typing import Iterable, Tuple

from src.graph.store import HeteroGraph, ingest_triples

EX = "http://ex.org/node/"
LINK = "http://ex.org/rel/link"

COMPOUND = "http://chem2bio2rdf.org/pubchem/resource/pubchem_compound/467801"
INTERACTS = "http://chem2bio2rdf.org/chemogenomics/resource/interaction"
GENES = [
    "HDAC5", "HDAC6", "HDAC10", "HDAH", "HDAC4", "HDAC7", "NCOR2", "HDAC11",
    "F3", "HDA106", "HDAC1", "HDAC9", "HDAC8", "HDAC2", "HDAC3", "HD1B",
]


def gene_uri(name: str) -> str:
    return f"http://chem2bio2rdf.org/uniprot/resource/gene/{name}"


def nt(s: str, p: str, o: str) -> str:
    return f"<{s}> <{p}> <{o}> ."


def graph_from_pairs(pairs: Iterable[Tuple[str, str]], predicate: str = LINK) -> HeteroGraph:
    """Graph over ``EX``-prefixed node names, one predicate."""
    return ingest_triples([nt(EX + a, predicate, EX + b) for a, b in pairs])
