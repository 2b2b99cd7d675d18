"""Exact and p-adic computations for L-invariants of semistable modules."""

__version__ = "0.1.0"
