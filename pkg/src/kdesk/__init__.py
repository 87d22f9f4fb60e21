"""Finite category homology and truncated K-theory computations over Z."""

__version__ = "0.1.0"
