"""
kgcomplete
Knowledge-graph embedding and link completion: typed random walks,
skip-gram embeddings, cosine ranking and a logistic-regression baseline.
"""

__version__ = "0.1.0"
