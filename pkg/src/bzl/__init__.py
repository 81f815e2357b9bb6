"""Numerical laboratory for weighted Bergman kernels on polynomial spaces and
the asymptotic normality of linear statistics of zeros of random polynomials."""

__version__ = "0.1.0"
