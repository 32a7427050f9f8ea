"""Spectral and metric experiments on finite Cayley graphs."""

__version__ = "0.1.0"
