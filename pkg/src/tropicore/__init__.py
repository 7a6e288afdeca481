"""Exact tropical homology, eigenwaves and intersection theory on tropical spaces."""

__version__ = "0.1.0"
