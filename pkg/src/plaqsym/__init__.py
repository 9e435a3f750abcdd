"""Symmetry structure of random plaquette Ising models over GF(2)."""

__version__ = "0.1.0"
