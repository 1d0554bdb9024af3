"""Sudler products and Birkhoff sums along irrational rotations."""

__version__ = "0.1.0"
