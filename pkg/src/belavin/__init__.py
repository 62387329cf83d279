"""Elliptic Z_n vertex-model toolkit: R-matrix, transfer hierarchy, T-Q solvers."""

__version__ = "0.1.0"
