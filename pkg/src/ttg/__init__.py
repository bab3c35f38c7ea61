"""Exact computations of comparison maps in tensor triangular geometry."""

__version__ = "0.1.0"
