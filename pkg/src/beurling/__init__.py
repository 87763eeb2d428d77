"""Numerical toolkit for Beurling generalized prime systems."""

__version__ = "0.1.0"
