"""Bounded symbolic verification of multiset-rewriting protocol theories."""

__version__ = "0.1.0"
