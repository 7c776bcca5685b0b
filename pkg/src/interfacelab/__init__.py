"""Quantized interface currents between two-dimensional tight-binding materials."""

__version__ = "0.1.0"
