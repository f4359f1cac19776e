"""Desk-scale laboratory for introspective MIP* protocols over GF(2^t)."""

__version__ = "0.1.0"
