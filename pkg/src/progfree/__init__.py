"""Exact tools for three-term-progression-free sets."""

__version__ = "0.1.0"
