"""Pseudorandom multi-switching laboratory."""

__version__ = "0.1.0"
