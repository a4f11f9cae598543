"""Convergence and local-surjectivity analysis of variational quantum eigensolver ansatzes."""

__version__ = "0.1.0"
