"""Brute-force laboratory for quantum minimum circuit size problems."""

__version__ = "0.1.0"
