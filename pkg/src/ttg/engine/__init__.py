"""Comparison maps built from balanced endomorphisms."""
