"""Generalized factorials, prime-constellation conjectures and Apery sequences."""

__version__ = "0.1.0"
