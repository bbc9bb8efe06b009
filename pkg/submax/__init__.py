"""Deterministic recursive maximization of non-negative submodular functions."""

__version__ = "0.1.0"
