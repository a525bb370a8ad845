"""UMAP neighbourhood systems, Vietoris-Rips hierarchies and interleaving certificates."""
