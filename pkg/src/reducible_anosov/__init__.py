"""Eigenvalue configurations and deformation domains of reducible Anosov representations of free groups."""

__version__ = "0.1.0"
