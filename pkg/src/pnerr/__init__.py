"""Numerical laboratory for prime-counting error terms and sums over zeta zeros."""

__version__ = "0.1.0"
