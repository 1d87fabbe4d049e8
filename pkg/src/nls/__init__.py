"""Embedded-eigenvalue criteria and FFT validation for non-local Schrodinger operators."""

__version__ = "0.1.0"
