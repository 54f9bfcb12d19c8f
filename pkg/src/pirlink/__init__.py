"""Biographical-directory ingestion, family graphs, father-son linkage and descriptive analytics."""

__version__ = "0.1.0"
