"""Exact translation-surface computations: cylinders, degenerations, rel flows."""

__version__ = "0.1.0"
