"""Individually verifiable polling-booth voting."""

__version__ = "0.1.0"
