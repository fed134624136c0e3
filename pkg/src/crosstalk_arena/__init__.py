"""Desk-scale simulator of SWAP-path crosstalk attacks on shared quantum devices."""

__version__ = "0.1.0"
