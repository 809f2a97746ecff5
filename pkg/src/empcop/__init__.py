"""Empirical copula processes, the multiplier bootstrap and their Gaussian limits."""

__version__ = "0.1.0"
