"""Hierarchy-imbalance-aware node classification toolkit."""

__version__ = "0.1.0"
