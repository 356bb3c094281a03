"""Galois embeddings of K3 surfaces with abelian Galois group."""

__version__ = "0.1.0"
