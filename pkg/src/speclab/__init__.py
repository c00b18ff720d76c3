"""Numerical experiments on the limit of |A^n|^(1/n) for matrices and truncated operators."""

__version__ = "0.1.0"
